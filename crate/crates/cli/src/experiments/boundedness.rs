use rand::Rng;
use stokeslab_core::norms::{sup_region, LayerField, LayerQuantity, NewtonField, SumField};
use stokeslab_core::riesz::riesz_layer;
use stokeslab_core::{profile_psi, w_l, BoundaryData, RegionSpec, Result, SpaceTimePoint};

use super::{probe_rng, rel_diff};
use crate::config::{ExperimentConfig, ExperimentId, DIMENSION};
use crate::plot::{PlotStyle, Series};
use crate::report::{Recorder, Table, Verdict};

pub(super) fn run(cfg: &ExperimentConfig, rec: &mut Recorder) {
    let c = &cfg.boundedness;
    let mut rng = probe_rng(cfg, ExperimentId::Boundedness);
    let data = c
        .spatial
        .rule()
        .map(|rule| BoundaryData::new(rule, c.temporal.clone()));

    rec.check("sup_refinement", true, |rec| {
        let data = data.as_ref().map_err(Clone::clone)?;
        let field = SumField::new(vec![
            Box::new(LayerField {
                data,
                q: c.quadrature,
                quantity: LayerQuantity::Value,
            }),
            Box::new(NewtonField { data }),
        ])?;
        let mut sups = Vec::with_capacity(c.levels.len());
        for &level in &c.levels {
            let region = RegionSpec::new(c.radius, 0.0, DIMENSION)?
                .with_resolution(c.resolution.refined(level))
                .with_time_breaks(c.temporal.breakpoints())
                .with_min_time_panel(c.min_time_panel);
            sups.push(sup_region(&field, &region)?);
        }
        let mut table = Table::new("sup_by_level", &["level", "sup"]);
        for (&l, &s) in c.levels.iter().zip(&sups) {
            table.push(vec![l as f64, s]);
        }
        rec.table(table);
        rec.plot(
            "sup_by_level",
            vec![Series::new(
                "sup |w_B1 + w_N|",
                c.levels
                    .iter()
                    .zip(&sups)
                    .map(|(&l, &s)| (l as f64, s))
                    .collect(),
            )],
            PlotStyle::new(
                "Sup over refining lattices of Q_1^+",
                "refinement factor",
                "sup",
            )
            .log_x(),
        );
        let n = sups.len();
        let change = rel_diff(sups[n - 1], sups[n - 2]);
        Ok(Verdict::new(format!(
            "change between the two finest lattices < {}",
            c.change_tol
        ))
        .value("sups", &sups)
        .value("levels", &c.levels)
        .value("relative_change", change)
        .note("w_1 is evaluated as the boundary layer plus the instantaneous Newtonian part")
        .pass(change < c.change_tol))
    });

    rec.check("spatial_rule_consistency", true, |_| {
        let data = data.as_ref().map_err(Clone::clone)?;
        let reference = c.spatial.profile()?.default_rule();
        let mut worst: f64 = 0.0;
        for _ in 0..c.rule_points {
            let r = c.radius * rng.gen_range(0.0f64..1.0).sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = [r * a.cos(), r * a.sin()];
            let xn = rng.gen_range(0.0..c.radius);
            let psi = (
                profile_psi(&x, &data.spatial)?,
                profile_psi(&x, &reference)?,
            );
            let layer = (
                riesz_layer(&x, xn, &data.spatial)?.0,
                riesz_layer(&x, xn, &reference)?.0,
            );
            worst = worst
                .max(rel_diff(psi.0, psi.1))
                .max(rel_diff(layer.0, layer.1));
        }
        Ok(Verdict::new(format!(
            "lattice rule matches the reference rule to {} relative (psi and Newtonian layer)",
            c.rule_tol
        ))
        .value("max_relative_difference", worst)
        .value("lattice_rule_nodes", data.spatial.nodes.len())
        .value("reference_rule_nodes", reference.nodes.len())
        .pass(worst < c.rule_tol))
    });

    rec.check("w_l_spot_check", false, |_| {
        if c.w_l_points == 0 {
            return Ok(Verdict::skipped("w_l_points = 0"));
        }
        let data = data.as_ref().map_err(Clone::clone)?;
        let sup_g = c.temporal.sup_norm();
        let values = (0..c.w_l_points)
            .map(|_| {
                let x1 = rng.gen_range(-1.0..1.0);
                let x2 = rng.gen_range(-1.0..1.0);
                let xn = rng.gen_range(0.1..0.5);
                let t = rng.gen_range(0.5..1.0);
                w_l(
                    1,
                    &SpaceTimePoint::new(vec![x1, x2], xn, t)?,
                    data,
                    &c.w_l_quadrature,
                )
            })
            .collect::<Result<Vec<f64>>>()?;
        let ratio = values.iter().map(|v| v.abs()).fold(0.0, f64::max) / sup_g;
        Ok(
            Verdict::new("w_L finite at every spot point; max |w_L| / sup |g| reported")
                .value("values", &values)
                .value("max_ratio", ratio)
                .pass(values.iter().all(|v| v.is_finite())),
        )
    });
}
