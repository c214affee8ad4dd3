use rayon::prelude::*;
use stokeslab_core::norms::{lp_integral, LayerField, LayerQuantity};
use stokeslab_core::solution::measure_trace_constant;
use stokeslab_core::{
    dxn_w_b1, linear_fit, BoundaryData, RegionSpec, Result, SpaceTimePoint, TemporalProfile,
};

use super::{log_space, ratios};
use crate::config::{ExperimentConfig, DIMENSION};
use crate::plot::{PlotStyle, Series};
use crate::report::{Recorder, Table, Verdict};

pub(super) fn run(cfg: &ExperimentConfig, rec: &mut Recorder) {
    let c = &cfg.gradient_blowup;
    let rule = c.spatial.rule();

    rec.check("log_slope_regression", true, |rec| {
        let data = BoundaryData::new(rule.clone()?, TemporalProfile::sqrt_log());
        let xs = log_space(
            c.regression_range[0],
            c.regression_range[1],
            c.regression_samples,
        );
        let ys = xs
            .par_iter()
            .map(|&xn| {
                let p = SpaceTimePoint::new(c.probe_tangential.to_vec(), xn, c.regression_time)?;
                Ok(dxn_w_b1(&p, &data, &cfg.quadrature)?.abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let logs: Vec<f64> = xs.iter().map(|x| (1.0 / x).ln()).collect();
        let fit = linear_fit(&logs, &ys)?;
        let mut table = Table::new(
            "normal_derivative_profile",
            &["x_n", "ln_inv_x_n", "abs_dxn_w_b1"],
        );
        for ((x, l), y) in xs.iter().zip(&logs).zip(&ys) {
            table.push(vec![*x, *l, *y]);
        }
        rec.table(table);
        let line = |l: f64| fit.slope * l + fit.intercept;
        rec.plot(
            "log_growth",
            vec![
                Series::new(
                    "|D_n w_B1|",
                    logs.iter().cloned().zip(ys.iter().cloned()).collect(),
                ),
                Series::new(
                    "fit",
                    vec![
                        (logs[0], line(logs[0])),
                        (logs[logs.len() - 1], line(logs[logs.len() - 1])),
                    ],
                ),
            ],
            PlotStyle::new(
                "Normal derivative near the boundary",
                "ln(1/x_n)",
                "|D_n w_B1|",
            ),
        );
        Ok(
            Verdict::new(format!("slope > 0 and R^2 > {}", c.r_squared_min))
                .value("slope", fit.slope)
                .value("intercept", fit.intercept)
                .value("r_squared", fit.r_squared)
                .value("samples", xs.len())
                .pass(fit.slope > 0.0 && fit.r_squared > c.r_squared_min),
        )
    });

    rec.check("trace_constant", true, |_| {
        let kappa = measure_trace_constant(&cfg.quadrature)?;
        let err = (kappa - c.trace_fixture).abs();
        Ok(
            Verdict::new(format!("|kappa - {}| < {:e}", c.trace_fixture, c.trace_tol))
                .value("kappa", kappa)
                .value("error", err)
                .pass(err < c.trace_tol),
        )
    });

    rec.check("epsilon_divergence", true, |rec| {
        let data = BoundaryData::new(rule.clone()?, c.divergence_profile.clone());
        let field = LayerField {
            data: &data,
            q: c.quadrature,
            quantity: LayerQuantity::NormalDerivative,
        };
        let eps: Vec<f64> = (0..=c.halvings)
            .map(|k| c.epsilon_start / 2f64.powi(k as i32))
            .collect();
        let mut integrals = Vec::with_capacity(eps.len());
        for &e in &eps {
            let region = RegionSpec::new(c.radius, e, DIMENSION)?
                .with_resolution(c.resolution)
                .with_time_breaks(c.divergence_profile.breakpoints())
                .with_min_time_panel(c.min_time_panel);
            integrals.push(lp_integral(&field, c.divergence_p, &region)?.integral);
        }
        let growth = ratios(&integrals);
        let last = &growth[growth.len() - 3..];
        let mut table = Table::new("truncated_integrals", &["epsilon", "integral"]);
        for (e, v) in eps.iter().zip(&integrals) {
            table.push(vec![*e, *v]);
        }
        rec.table(table);
        rec.plot(
            "epsilon_divergence",
            vec![Series::new(
                format!("p = {}", c.divergence_p),
                eps.iter().cloned().zip(integrals.iter().cloned()).collect(),
            )],
            PlotStyle::new(
                "Truncated L^p integral of D_n w_B1",
                "epsilon",
                "integral over x_n > epsilon",
            )
            .log_log(),
        );
        Ok(Verdict::new(format!(
            "growth factor > {} on each of the last three halvings",
            c.growth_min
        ))
        .value("epsilons", &eps)
        .value("integrals", &integrals)
        .value("growth_factors", &growth)
        .value("p", c.divergence_p)
        .pass(last.iter().all(|g| *g > c.growth_min)))
    });
}
