use stokeslab_core::norms::{kernel_constant, kernel_k_mass, khat, khat_closed_form};
use stokeslab_core::{log_log_fit, plancherel_check, PlancherelReport, Result, TemporalProfile};

use super::{log_space, rel_diff, spread};
use crate::config::{ExperimentConfig, PlancherelConfig};
use crate::plot::{PlotStyle, Series};
use crate::report::{Recorder, Table, Verdict};

/// `exp(1 - 1/(1 - u^2))` on `|u| < 1`.
fn bump(t: f64, c: &PlancherelConfig) -> f64 {
    let u = (t - c.bump_center) / c.bump_half_width;
    if u.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

pub(super) fn run(cfg: &ExperimentConfig, rec: &mut Recorder) {
    let c = &cfg.plancherel;
    let q = cfg.quadrature;
    let reports = (|| -> Result<(PlancherelReport, PlancherelReport)> {
        let g = TemporalProfile::sampled(
            |t| bump(t, c),
            c.bump_center - c.bump_half_width,
            c.bump_center + c.bump_half_width,
            c.bump_samples,
        )?;
        let coarse = plancherel_check(&g, &c.grid, &q)?;
        let fine = plancherel_check(&g, &c.grid.refined(c.refine_factor), &q)?;
        Ok((coarse, fine))
    })();

    rec.check("ratio_resolution", true, |_| {
        let (coarse, fine) = reports.clone()?;
        let (Some(a), Some(b)) = (coarse.ratio, fine.ratio) else {
            return Ok(Verdict::new("ratio defined at both resolutions").note("profile vanished"));
        };
        let change = rel_diff(b, a);
        Ok(Verdict::new(format!(
            "lhs / rhs agrees across resolutions within {}",
            c.ratio_tol
        ))
        .value("ratio_coarse", a)
        .value("ratio_fine", b)
        .value("lhs_coarse", coarse.lhs)
        .value("lhs_fine", fine.lhs)
        .value("h_quarter_coarse", coarse.h_quarter)
        .value("h_quarter_fine", fine.h_quarter)
        .value("relative_change", change)
        .value("refine_factor", c.refine_factor)
        .pass(change < c.ratio_tol))
    });

    rec.check("tail_truncation", true, |_| {
        let (coarse, fine) = reports.clone()?;
        Ok(
            Verdict::new("share of the lhs from the late half of the time window below 1e-3")
                .value("tail_fraction_coarse", coarse.tail_fraction)
                .value("tail_fraction_fine", fine.tail_fraction)
                .pass(coarse.tail_converged && fine.tail_converged),
        )
    });

    rec.check("kernel_mass", true, |_| {
        let m = kernel_k_mass(c.mass_horizon, &q)?;
        Ok(Verdict::new(format!(
            "|int K dt| < {:e} (truncated part plus analytic tail)",
            c.mass_tol
        ))
        .value("truncated", m.truncated)
        .value("tail", m.tail)
        .value("total", m.total)
        .pass(m.total.abs() < c.mass_tol))
    });

    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let probes = sorted(&c.khat_points);
    let near_zero = sorted(&c.sqrt_points);

    rec.check("khat_closed_form", true, |rec| {
        let xs = log_space(1e-3, 1e2, 26);
        let mut table = Table::new(
            "kernel_transform",
            &["x", "abs_khat_numeric", "abs_khat_closed_form"],
        );
        let mut worst: f64 = 0.0;
        for &x in xs.iter().chain(&probes) {
            let (a, b) = (khat(x, &q)?, khat_closed_form(x));
            worst = worst.max((a - b).norm() / b.norm());
            table.push(vec![x, a.norm(), b.norm()]);
        }
        let curve = |col: usize| -> Vec<(f64, f64)> {
            table.rows[..xs.len()]
                .iter()
                .map(|r| (r[0], r[col]))
                .collect()
        };
        rec.plot(
            "kernel_transform",
            vec![
                Series::new("numeric", curve(1)),
                Series::new("closed form", curve(2)),
            ],
            PlotStyle::new("Transform of the layer kernel", "x", "|K^(x)|").log_log(),
        );
        rec.table(table);
        Ok(
            Verdict::new(format!("relative difference < {:e}", c.closed_form_tol))
                .value("max_relative_difference", worst)
                .pass(worst < c.closed_form_tol),
        )
    });

    // Spread of |K^(x)| / x^power over `xs`, with the log-log slope.
    let scaling = |xs: &[f64], power: f64| -> Result<(Vec<f64>, f64, f64)> {
        let vals = xs
            .iter()
            .map(|&x| khat(x, &q).map(|z| z.norm()))
            .collect::<Result<Vec<f64>>>()?;
        let scaled: Vec<f64> = vals
            .iter()
            .zip(xs)
            .map(|(v, x)| v / x.powf(power))
            .collect();
        Ok((
            scaled.clone(),
            spread(&scaled),
            log_log_fit(xs, &vals)?.slope,
        ))
    };
    rec.check("khat_linear_scaling", false, |_| {
        let (scaled, s, slope) = scaling(&probes, 1.0)?;
        Ok(Verdict::new(format!("|K^(x)| / x varies by less than {}", c.khat_tol))
            .value("points", &probes)
            .value("scaled", &scaled)
            .value("spread", s)
            .value("log_log_slope", slope)
            .note("the kernel has no first moment and its transform vanishes like sqrt(x); see khat_sqrt_scaling")
            .pass(s < c.khat_tol))
    });
    rec.check("khat_sqrt_scaling", true, |_| {
        let (scaled, s, slope) = scaling(&near_zero, 0.5)?;
        Ok(Verdict::new(format!(
            "|K^(x)| / sqrt(x) varies by less than {}",
            c.khat_tol
        ))
        .value("points", &near_zero)
        .value("scaled", &scaled)
        .value("spread", s)
        .value("log_log_slope", slope)
        .pass(s < c.khat_tol))
    });

    rec.check("kernel_constant", true, |_| {
        let k = kernel_constant(c.constant_y_max, &q)?;
        let rel = rel_diff(k, c.constant_fixture);
        Ok(Verdict::new(format!(
            "matches the fixture {} to {:e}",
            c.constant_fixture, c.constant_tol
        ))
        .value("constant", k)
        .value("relative_difference", rel)
        .pass(rel < c.constant_tol))
    });
}
