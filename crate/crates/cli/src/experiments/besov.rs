use stokeslab_core::norms::gagliardo_seminorm_fn;
use stokeslab_core::{
    charsum_divergence_curve, gagliardo_seminorm, log_log_fit, SeminormRequest, TemporalProfile,
};

use super::ratios;
use crate::config::ExperimentConfig;
use crate::plot::{PlotStyle, Series};
use crate::report::{Recorder, Table, Verdict};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub(super) fn run(cfg: &ExperimentConfig, rec: &mut Recorder) {
    let c = &cfg.besov_divergence;
    let q = cfg.quadrature;

    rec.check("slope_match", true, |rec| {
        let curve = charsum_divergence_curve(c.a, c.p, c.k_max)?;
        let ks: Vec<f64> = curve.iter().map(|p| p.k as f64).collect();
        let values: Vec<f64> = curve.iter().map(|p| p.value).collect();
        let companion: Vec<f64> = curve.iter().map(|p| p.companion).collect();
        let computed = log_log_fit(&ks, &values)?;
        let analytic = log_log_fit(&ks, &companion)?;
        let mismatch = (computed.slope / analytic.slope - 1.0).abs();
        let mut table = Table::new("divergence_curve", &["k", "delta", "seminorm", "companion"]);
        for p in &curve {
            table.push(vec![p.k as f64, p.delta, p.value, p.companion]);
        }
        rec.table(table);
        rec.plot(
            "divergence_curve",
            vec![
                Series::new(
                    "seminorm",
                    ks.iter().cloned().zip(values.iter().cloned()).collect(),
                ),
                Series::new(
                    "companion series",
                    ks.iter().cloned().zip(companion.iter().cloned()).collect(),
                ),
            ],
            PlotStyle::new(
                &format!("char_sum truncations, a = {}, p = {}", c.a, c.p),
                "K",
                "value",
            )
            .log_log(),
        );
        Ok(
            Verdict::new(format!("|slope / companion slope - 1| < {}", c.slope_tol))
                .value("slope", computed.slope)
                .value("companion_slope", analytic.slope)
                .value("r_squared", computed.r_squared)
                .value("relative_mismatch", mismatch)
                .pass(mismatch < c.slope_tol),
        )
    });

    rec.check("two_block_oracle", true, |_| {
        let g = TemporalProfile::char_sum(c.a, 2)?;
        let (lo, hi) = *g.blocks().last().expect("two blocks");
        let req = SeminormRequest::new(0.5 - 0.5 / c.p, c.p, 0.0, 1.0, 0.1 * (hi - lo))?;
        let exact = gagliardo_seminorm(&g, &req, &q)?;
        let nested = gagliardo_seminorm_fn(|t| g.eval(t), &g.breakpoints(), &req, &q)?;
        let rel = ((exact - nested) / nested).abs();
        Ok(Verdict::new(format!(
            "block formula matches nested quadrature to {:e} relative",
            c.oracle_tol
        ))
        .value("block_formula", exact)
        .value("nested_quadrature", nested)
        .value("relative_difference", rel)
        .pass(rel < c.oracle_tol))
    });

    rec.check("large_p_divergence", true, |rec| {
        let g = TemporalProfile::char_sum(c.a, c.large_p_blocks)?;
        let (lo, hi) = *g.blocks().last().expect("at least one block");
        let s = 0.5 - 0.5 / c.large_p;
        let deltas: Vec<f64> = (0..=c.delta_halvings)
            .map(|k| 0.1 * (hi - lo) / 2f64.powi(k as i32))
            .collect();
        let values = deltas
            .iter()
            .map(|&d| gagliardo_seminorm(&g, &SeminormRequest::new(s, c.large_p, 0.0, 1.0, d)?, &q))
            .collect::<stokeslab_core::Result<Vec<f64>>>()?;
        let growth = ratios(&values);
        let mut table = Table::new("large_p_seminorm", &["delta", "seminorm"]);
        for (d, v) in deltas.iter().zip(&values) {
            table.push(vec![*d, *v]);
        }
        rec.table(table);
        Ok(Verdict::new(format!(
            "every delta halving grows the value by > {}",
            c.growth_min
        ))
        .value("p", c.large_p)
        .value("deltas", &deltas)
        .value("values", &values)
        .value("growth_factors", &growth)
        .pass(growth.iter().all(|r| *r > c.growth_min)))
    });

    rec.check("harmonic_boundary_case", true, |_| {
        let p_star = 3.0 - 2.0 / (1.0 + c.a);
        let curve = charsum_divergence_curve(c.a, p_star, c.harmonic_k_max)?;
        let mut worst: f64 = 0.0;
        let mut residuals = Vec::with_capacity(curve.len());
        for point in &curve {
            let k = point.k as f64;
            let r = point.companion - k.ln() - EULER_GAMMA;
            residuals.push(r);
            // H_K - ln K - gamma lies in (1/(2K+1), 1/(2K)).
            worst = worst.max(r * 2.0 * k);
        }
        let inside = residuals.iter().zip(&curve).all(|(r, p)| {
            *r > 1.0 / (2.0 * p.k as f64 + 1.0) - 1e-12 && *r < 1.0 / (2.0 * p.k as f64) + 1e-12
        });
        Ok(
            Verdict::new("companion minus ln K tends to Euler's constant with 1/(2K) accuracy")
                .value("p", p_star)
                .value("residuals", &residuals)
                .value("max_scaled_residual", worst)
                .pass(inside),
        )
    });
}
