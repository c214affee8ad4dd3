use criterion::{black_box, criterion_group, criterion_main, Criterion};
use stokeslab_bench::{box_data, probe};
use stokeslab_core::norms::gagliardo_seminorm_fn;
use stokeslab_core::{
    caloric_layer, dxn_w_b1, gagliardo_seminorm, QuadratureSpec, SeminormRequest, TemporalProfile,
};

fn caloric(c: &mut Criterion) {
    let q = QuadratureSpec::default();
    let blocks = TemporalProfile::char_sum(0.5, 16).unwrap();
    let smooth = TemporalProfile::power_log(3.0).unwrap();
    c.bench_function("caloric_layer_char_sum", |b| {
        b.iter(|| caloric_layer(1, black_box(1e-3), 1.0, &blocks, &q).unwrap())
    });
    c.bench_function("caloric_layer_power_log", |b| {
        b.iter(|| caloric_layer(1, black_box(1e-3), 1.0, &smooth, &q).unwrap())
    });
    let data = box_data(TemporalProfile::sqrt_log());
    let p = probe();
    c.bench_function("dxn_w_b1_sqrt_log", |b| {
        b.iter(|| dxn_w_b1(black_box(&p), &data, &q).unwrap())
    });
}

fn seminorms(c: &mut Criterion) {
    let q = QuadratureSpec::default();
    let g = TemporalProfile::char_sum(0.5, 2).unwrap();
    let (lo, hi) = *g.blocks().last().unwrap();
    let req = SeminormRequest::new(0.3, 2.5, 0.0, 1.0, 0.1 * (hi - lo)).unwrap();
    c.bench_function("seminorm_block_formula", |b| {
        b.iter(|| gagliardo_seminorm(black_box(&g), &req, &q).unwrap())
    });
    c.bench_function("seminorm_nested_quadrature", |b| {
        b.iter(|| {
            gagliardo_seminorm_fn(|t| g.eval(t), &g.breakpoints(), black_box(&req), &q).unwrap()
        })
    });
}

criterion_group!(benches, caloric, seminorms);
criterion_main!(benches);
