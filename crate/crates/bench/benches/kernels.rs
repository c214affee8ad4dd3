use criterion::{black_box, criterion_group, criterion_main, Criterion};
use stokeslab_bench::probe;
use stokeslab_core::quadrature::integrate;
use stokeslab_core::{gauss_riesz, heat_kernel, tensor_b, tensor_l, QuadratureSpec};

fn kernels(c: &mut Criterion) {
    let p = probe();
    let q = QuadratureSpec::default();
    c.bench_function("heat_kernel", |b| b.iter(|| heat_kernel(black_box(&p))));
    c.bench_function("tensor_l_1n", |b| {
        b.iter(|| tensor_l(1, 3, black_box(&p), &q).unwrap())
    });
    c.bench_function("tensor_b_1", |b| {
        b.iter(|| tensor_b(1, black_box(&p), &q).unwrap())
    });
    c.bench_function("gauss_riesz", |b| {
        b.iter(|| gauss_riesz(black_box(&[2.0, 0.5]), 1e-2, &q).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let q = QuadratureSpec::default();
    c.bench_function("integrate_sqrt_endpoint", |b| {
        b.iter(|| integrate(|x: f64| Ok(x.sqrt() * x.cos()), 0.0, black_box(1.0), &q).unwrap())
    });
}

criterion_group!(benches, kernels, quadrature);
criterion_main!(benches);
