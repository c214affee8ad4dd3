use rand::Rng;
use stokeslab_core::kernels::{half_normal_derivative, heat_convolution, newtonian};
use stokeslab_core::quadrature::integrate;
use stokeslab_core::{heat_kernel, tensor_b, tensor_l, Result, SpaceTimePoint};

use super::probe_rng;
use crate::config::{ExperimentConfig, ExperimentId, DIMENSION};
use crate::plot::{PlotStyle, Series};
use crate::report::{Recorder, Table, Verdict};

fn point(x: &[f64], t: f64) -> Result<SpaceTimePoint> {
    SpaceTimePoint::new(x[..x.len() - 1].to_vec(), x[x.len() - 1], t)
}

pub(super) fn run(cfg: &ExperimentConfig, rec: &mut Recorder) {
    let c = &cfg.kernel_identities;
    let q = cfg.quadrature;
    let mut rng = probe_rng(cfg, ExperimentId::KernelIdentities);
    let probes: Vec<SpaceTimePoint> = (0..c.probe_points)
        .map(|_| {
            let x1 = rng.gen_range(-c.probe_tangential..=c.probe_tangential);
            let x2 = rng.gen_range(-c.probe_tangential..=c.probe_tangential);
            let xn = rng.gen_range(c.probe_normal[0]..=c.probe_normal[1]);
            let t = rng.gen_range(c.probe_time[0]..=c.probe_time[1]);
            SpaceTimePoint::new(vec![x1, x2], xn, t).expect("probe box is valid")
        })
        .collect();

    rec.check("semigroup", true, |_| {
        let [t, s] = c.semigroup_times;
        let e = c.semigroup_extent;
        let mut worst: f64 = 0.0;
        for i in 0..27 {
            let x = [
                (i % 3) as f64 - 1.0,
                ((i / 3) % 3) as f64 - 1.0,
                (i / 9) as f64 - 1.0,
            ]
            .map(|v| v * e);
            let lhs = heat_convolution(&x, t, s, c.hermite_order)?;
            // The kernel is even in x_n, so the mirror image is used below the plane.
            let rhs = heat_kernel(&point(&[x[0], x[1], x[2].abs()], t + s)?);
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(Verdict::new(format!(
            "max |G_t * G_s - G_(t+s)| < {:e} on a 3^3 grid",
            c.semigroup_tol
        ))
        .value("max_error", worst)
        .value("grid_points", 27)
        .pass(worst < c.semigroup_tol))
    });

    rec.check("heat_mass", true, |_| {
        let t = c.mass_time;
        let radial = |r: f64| {
            let g = heat_kernel(&SpaceTimePoint::new(vec![0.0, 0.0], r, t)?);
            Ok(4.0 * std::f64::consts::PI * r * r * g)
        };
        let mass = integrate(radial, 0.0, 40.0 * t.sqrt(), &q.scaled(1e-2))?.value;
        let err = (mass - 1.0).abs();
        Ok(Verdict::new(format!("|int G dx - 1| < {:e}", c.mass_tol))
            .value("mass", mass)
            .value("error", err)
            .pass(err < c.mass_tol))
    });

    rec.check("parabolic_scaling", true, |_| {
        let mut worst: f64 = 0.0;
        for p in &probes {
            let g = heat_kernel(p);
            for &l in &c.scaling_factors {
                let scaled = SpaceTimePoint::new(
                    p.x_tangential.iter().map(|v| l * v).collect(),
                    l * p.x_normal,
                    l * l * p.t,
                )?;
                let expect = l.powi(-(DIMENSION as i32)) * g;
                worst = worst.max(((heat_kernel(&scaled) - expect) / expect).abs());
            }
        }
        Ok(
            Verdict::new(format!("relative error < {:e}", c.scaling_tol))
                .value("max_relative_error", worst)
                .value("factors", &c.scaling_factors)
                .pass(worst < c.scaling_tol),
        )
    });

    let mut table = Table::new(
        "tensor_identities",
        &[
            "x1",
            "x2",
            "xn",
            "t",
            "trace_residual",
            "stated_residual",
            "observed_residual",
        ],
    );
    let mut residuals: Vec<[f64; 3]> = Vec::new();
    let mut failure = None;
    for p in &probes {
        let row = (|| -> Result<[f64; 3]> {
            let trace: f64 = (1..=DIMENSION)
                .map(|i| tensor_l(i, i, p, &q))
                .sum::<Result<f64>>()?;
            let l1n = tensor_l(1, DIMENSION, p, &q)?;
            let ln1 = tensor_l(DIMENSION, 1, p, &q)?;
            let b = tensor_b(1, p, &q)?;
            Ok([
                (trace - half_normal_derivative(p)?).abs(),
                (l1n - ln1 + b).abs(),
                (l1n - ln1 - b).abs(),
            ])
        })();
        match row {
            Ok(r) => {
                table.push(vec![
                    p.x_tangential[0],
                    p.x_tangential[1],
                    p.x_normal,
                    p.t,
                    r[0],
                    r[1],
                    r[2],
                ]);
                residuals.push(r);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let worst = |k: usize| residuals.iter().map(|r| r[k]).fold(0.0, f64::max);
    let tensor_check = |k: usize, what: &str| {
        let failure = failure.clone();
        let tol = c.tensor_tol;
        let count = residuals.len();
        let value = worst(k);
        let what = what.to_string();
        move |_: &mut Recorder| match failure {
            Some(e) => Err(e),
            None => Ok(
                Verdict::new(format!("max {what} < {tol:e} at {count} points"))
                    .value("max_residual", value)
                    .value("points", count)
                    .pass(value < tol),
            ),
        }
    };
    rec.check(
        "trace_identity",
        true,
        tensor_check(0, "|sum_i L_ii - D_n G / 2|"),
    );
    rec.check("l_b_relation_stated", false, |r| {
        tensor_check(1, "|L_1n - L_n1 + B_1n|")(r)
            .map(|v| v.note("sign as stated; the computed antisymmetric part is +B_1n, see l_b_relation_observed"))
    });
    rec.check(
        "l_b_relation_observed",
        true,
        tensor_check(2, "|L_1n - L_n1 - B_1n|"),
    );

    rec.check("b_odd_symmetry", true, |_| {
        let mut worst: f64 = 0.0;
        for p in &probes {
            let mut mirror = p.clone();
            mirror.x_tangential[0] = -mirror.x_tangential[0];
            worst = worst.max((tensor_b(1, p, &q)? + tensor_b(1, &mirror, &q)?).abs());
        }
        Ok(Verdict::new(format!(
            "|B_1n(x) + B_1n(x*)| < {:e} with x* the reflection in x_1",
            c.symmetry_tol
        ))
        .value("max_residual", worst)
        .pass(worst < c.symmetry_tol))
    });

    rec.check("newtonian_harmonic", true, |_| {
        let x = c.laplacian_point;
        let h = c.laplacian_step;
        let centre = newtonian(&x)?;
        let mut lap = 0.0;
        for k in 0..DIMENSION {
            let (mut a, mut b) = (x, x);
            a[k] += h;
            b[k] -= h;
            lap += (newtonian(&a)? - 2.0 * centre + newtonian(&b)?) / (h * h);
        }
        Ok(Verdict::new(format!(
            "finite-difference |Laplacian N| < {:e}",
            c.laplacian_tol
        ))
        .value("residual", lap.abs())
        .value("step", h)
        .pass(lap.abs() < c.laplacian_tol))
    });

    if !residuals.is_empty() {
        let floor = |v: f64| v.max(1e-18);
        let series = |k: usize, label: &str| {
            Series::new(
                label,
                residuals
                    .iter()
                    .enumerate()
                    .map(|(i, r)| ((i + 1) as f64, floor(r[k])))
                    .collect(),
            )
        };
        rec.plot(
            "tensor_residuals",
            vec![
                series(0, "trace identity"),
                series(1, "relation, stated sign"),
                series(2, "relation, observed sign"),
            ],
            PlotStyle::new(
                "Tensor identity residuals",
                "probe point",
                "absolute residual",
            )
            .log_y(),
        );
    }
    rec.table(table);
}
