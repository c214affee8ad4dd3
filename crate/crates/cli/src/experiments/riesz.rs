use rand::Rng;
use rayon::prelude::*;
use stokeslab_core::{gauss_riesz, profile_psi, Result, RieszSplit};

use super::{probe_rng, rel_diff};
use crate::config::{ExperimentConfig, ExperimentId, DIMENSION};
use crate::plot::{PlotStyle, Series};
use crate::report::{Recorder, Table, Verdict};

const AXES: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

struct Sample {
    axis: usize,
    radius: f64,
    t: f64,
    split: RieszSplit,
}

impl Sample {
    fn scaled_remainder(&self) -> f64 {
        self.split.remainder.abs() / self.t.powf(0.5 * DIMENSION as f64)
    }
}

fn sweep(radii: &[f64], times: &[f64], q: &stokeslab_core::QuadratureSpec) -> Result<Vec<Sample>> {
    let mut jobs = Vec::new();
    for axis in 0..AXES.len() {
        for &radius in radii {
            for &t in times {
                jobs.push((axis, radius, t));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(axis, radius, t)| {
            let x = AXES[axis].map(|v| v * radius);
            Ok(Sample {
                axis,
                radius,
                t,
                split: gauss_riesz(&x, t, q)?,
            })
        })
        .collect()
}

/// Inserts the midpoint of every neighbouring pair (geometric if `log`).
fn doubled(values: &[f64], log: bool) -> Vec<f64> {
    let mut out = vec![values[0]];
    for w in values.windows(2) {
        out.push(if log {
            (w[0] * w[1]).sqrt()
        } else {
            0.5 * (w[0] + w[1])
        });
        out.push(w[1]);
    }
    out
}

fn bound(samples: &[Sample]) -> f64 {
    samples
        .iter()
        .map(Sample::scaled_remainder)
        .fold(0.0, f64::max)
}

pub(super) fn run(cfg: &ExperimentConfig, rec: &mut Recorder) {
    let c = &cfg.riesz_asymptotics;
    let q = cfg.quadrature;
    let mut radii = c.radii.clone();
    radii.sort_by(f64::total_cmp);
    let mut times = c.times.clone();
    times.sort_by(f64::total_cmp);

    let base = sweep(&radii, &times, &q);
    let fine = sweep(&doubled(&radii, false), &doubled(&times, true), &q);

    rec.check("remainder_bound_stability", true, |_| {
        let (base, fine) = (
            base.as_ref().map_err(Clone::clone)?,
            fine.as_ref().map_err(Clone::clone)?,
        );
        let (cb, cf) = (bound(base), bound(fine));
        let change = rel_diff(cf, cb);
        Ok(Verdict::new(format!(
            "C = max |J| / t^(n/2) changes by at most {} under grid doubling",
            c.bound_stability
        ))
        .value("bound_base", cb)
        .value("bound_doubled", cf)
        .value("relative_change", change)
        .value("samples_base", base.len())
        .value("samples_doubled", fine.len())
        .pass(change <= c.bound_stability))
    });

    rec.check("leading_ratio", true, |_| {
        let ratios = radii
            .iter()
            .flat_map(|&r| [[r, 0.0], [-r, 0.0]])
            .map(|x| gauss_riesz(&x, c.leading_time, &q).map(|s| s.total / s.leading))
            .collect::<Result<Vec<f64>>>()?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Verdict::new(format!(
            "total / leading in [{}, {}] at t = {:e}",
            c.leading_band[0], c.leading_band[1], c.leading_time
        ))
        .value("min_ratio", lo)
        .value("max_ratio", hi)
        .pass(lo >= c.leading_band[0] && hi <= c.leading_band[1]))
    });

    rec.check("odd_symmetry", true, |_| {
        let base = base.as_ref().map_err(Clone::clone)?;
        let mut worst: f64 = 0.0;
        for s in base.iter().filter(|s| s.axis == 0) {
            let m = base
                .iter()
                .find(|m| m.axis == 1 && m.radius == s.radius && m.t == s.t)
                .expect("mirror sample present");
            worst = worst.max((s.split.total + m.split.total).abs() / s.split.total.abs().max(1.0));
        }
        Ok(Verdict::new(format!(
            "|J(X) + J(-X)| / max(1, |J|) < {:e}",
            c.symmetry_tol
        ))
        .value("max_residual", worst)
        .pass(worst < c.symmetry_tol))
    });

    let mut rng = probe_rng(cfg, ExperimentId::RieszAsymptotics);
    rec.check("psi_reference", true, |_| {
        let profile = c.spatial.profile()?;
        let rule = c.spatial.rule()?;
        let finer = profile.rule(2 * c.spatial.rule_panels, c.spatial.rule_order);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for _ in 0..c.psi_points {
            let r = rng.gen_range(0.0..1.0);
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = [r * a.cos(), r * a.sin()];
            let (coarse, fine) = (profile_psi(&x, &rule)?, profile_psi(&x, &finer)?);
            scale = scale.max(fine.abs());
            worst = worst.max((coarse - fine).abs());
        }
        let rel = worst / scale;
        Ok(Verdict::new(format!(
            "psi agrees with a doubled rule to {:e} relative",
            c.psi_tol
        ))
        .value("max_abs_difference", worst)
        .value("relative_difference", rel)
        .value("points", c.psi_points)
        .pass(rel < c.psi_tol))
    });

    if let Ok(fine) = &fine {
        let mut table = Table::new(
            "riesz_samples",
            &[
                "axis",
                "radius",
                "t",
                "total",
                "leading",
                "remainder",
                "scaled_remainder",
            ],
        );
        for s in fine {
            table.push(vec![
                s.axis as f64,
                s.radius,
                s.t,
                s.split.total,
                s.split.leading,
                s.split.remainder,
                s.scaled_remainder(),
            ]);
        }
        rec.table(table);
        let series: Vec<Series> = radii
            .iter()
            .filter_map(|&r| {
                let pts: Vec<(f64, f64)> = fine
                    .iter()
                    .filter(|s| s.axis == 0 && s.radius == r && s.scaled_remainder() > 0.0)
                    .map(|s| (s.t, s.scaled_remainder()))
                    .collect();
                (!pts.is_empty()).then(|| Series::new(format!("|X'| = {r}"), pts))
            })
            .collect();
        if !series.is_empty() {
            rec.plot(
                "remainder_scaling",
                series,
                PlotStyle::new("Scaled remainder along +e1", "t", "|J| / t^(n/2)").log_log(),
            );
        }
    }
}
