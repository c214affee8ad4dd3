//! Local space-time `L^p` norms on half-cylinders, temporal Gagliardo
//! seminorms and the Plancherel form of the normal-derivative layer.
//!
//! Fourier transforms use `f^(xi) = int f(t) e^{-2 pi i xi t} dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{TemporalKind, TemporalProfile};
use crate::error::{invalid, Error, Result};
use crate::kernels::{heat_kernel_1d_deriv, sphere_area, SpaceTimePoint};
use crate::quadrature::{composite_legendre, graded_edges, integrate_pieces, QuadratureSpec};
use crate::riesz::{psi_with_gradient, riesz_layer};
use crate::solution::{caloric_layer, BoundaryData};

/// Panel counts of the tensor lattice; every panel carries `order`
/// Gauss–Legendre nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeResolution {
    /// Uniform panels in `x_n` after the geometric grading from the cutoff.
    pub normal: usize,
    /// Radial panels of the tangential disc.
    pub tangential: usize,
    /// Uniform panels in `t` before the grading around breaks.
    pub time: usize,
    pub order: usize,
}

impl Default for LatticeResolution {
    fn default() -> Self {
        Self {
            normal: 6,
            tangential: 3,
            time: 12,
            order: 6,
        }
    }
}

impl LatticeResolution {
    /// All panel counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            normal: self.normal * factor,
            tangential: self.tangential * factor,
            time: self.time * factor,
            order: self.order,
        }
    }
}

/// `Q_r^+ = B_r^+ x (1 - r^2, 1)` with `x_n < epsilon` removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub radius: f64,
    pub epsilon: f64,
    pub n: usize,
    #[serde(default)]
    pub resolution: LatticeResolution,
    /// Times where the field may be singular; the lattice is graded
    /// geometrically on both sides of each.
    #[serde(default)]
    pub time_breaks: Vec<f64>,
    /// Floor on the width of the time panels next to a break.
    #[serde(default = "default_min_time_panel")]
    pub min_time_panel: f64,
}

fn default_min_time_panel() -> f64 {
    1e-9
}

impl RegionSpec {
    pub fn new(radius: f64, epsilon: f64, n: usize) -> Result<Self> {
        let r = Self {
            radius,
            epsilon,
            n,
            resolution: LatticeResolution::default(),
            time_breaks: Vec::new(),
            min_time_panel: default_min_time_panel(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_resolution(mut self, resolution: LatticeResolution) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_time_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.time_breaks = breaks.into_iter().collect();
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_min_time_panel(mut self, width: f64) -> Self {
        self.min_time_panel = width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_time_panel > 0.0) {
            return Err(invalid("minimum time panel must be positive"));
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(invalid(format!(
                "region radius {} outside (0, 1]",
                self.radius
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < self.radius) {
            return Err(invalid(format!("cutoff {} outside [0, r)", self.epsilon)));
        }
        if self.n != 2 && self.n != 3 {
            return Err(invalid("regions are implemented for n = 2, 3"));
        }
        let res = &self.resolution;
        if res.normal == 0 || res.tangential == 0 || res.time == 0 || res.order == 0 {
            return Err(invalid("lattice resolution must be positive"));
        }
        Ok(())
    }

    pub fn time_interval(&self) -> (f64, f64) {
        (1.0 - self.radius * self.radius, 1.0)
    }

    /// Width of the finest panel next to the cutoff.
    fn first_normal_width(&self) -> f64 {
        self.epsilon.max(self.radius * 1e-6)
    }

    /// Lattice nodes `(x_n, weight)`, graded toward the cutoff and toward
    /// `x_n = r`, where the disc radius has a square-root endpoint.
    pub fn normal_nodes(&self) -> Vec<(f64, f64)> {
        composite_legendre(&self.normal_edges(), self.resolution.order)
    }

    fn normal_edges(&self) -> Vec<f64> {
        let mut edges = graded_edges(
            self.epsilon,
            self.radius,
            self.first_normal_width(),
            2.0,
            self.resolution.normal,
        );
        let top = edges[edges.len() - 2];
        let mut w = 0.5 * (self.radius - top);
        for _ in 0..16 {
            edges.push(self.radius - w);
            w *= 0.5;
        }
        edges.sort_by(f64::total_cmp);
        edges
    }

    /// Lattice nodes `(t, weight)`.
    pub fn time_nodes(&self) -> Vec<(f64, f64)> {
        composite_legendre(&self.time_edges(), self.resolution.order)
    }

    fn time_edges(&self) -> Vec<f64> {
        let (t0, t1) = self.time_interval();
        let h = self.first_normal_width();
        let w0 = (h * h / 16.0).max(self.min_time_panel);
        break_graded_edges(t0, t1, self.resolution.time, &self.time_breaks, w0)
    }

    /// Nodes `(x', weight)` of the tangential disc of radius
    /// `sqrt(r^2 - x_n^2)`.
    pub fn tangential_nodes(&self, x_normal: f64) -> Vec<([f64; 2], f64)> {
        self.disc(x_normal, false)
    }

    fn disc(&self, x_normal: f64, closed: bool) -> Vec<([f64; 2], f64)> {
        let rho = (self.radius * self.radius - x_normal * x_normal)
            .max(0.0)
            .sqrt();
        disc_nodes(
            self.n - 1,
            rho,
            self.resolution.tangential,
            self.resolution.order,
            closed,
        )
    }
}

/// Gauss–Legendre nodes of the panels, plus the panel edges with zero weight
/// when `closed`.
fn panel_nodes(edges: &[f64], order: usize, closed: bool) -> Vec<(f64, f64)> {
    let mut nodes = composite_legendre(edges, order);
    if closed {
        nodes.extend(edges.iter().map(|e| (*e, 0.0)));
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    nodes
}

/// Product rule on the disc (or interval) of radius `rho` about the origin.
fn disc_nodes(
    dim: usize,
    rho: f64,
    panels: usize,
    order: usize,
    closed: bool,
) -> Vec<([f64; 2], f64)> {
    if rho <= 0.0 {
        return Vec::new();
    }
    if dim == 1 {
        let edges: Vec<f64> = (0..=2 * panels)
            .map(|k| -rho + rho * k as f64 / panels as f64)
            .collect();
        return panel_nodes(&edges, order, closed)
            .into_iter()
            .map(|(x, w)| ([x, 0.0], w))
            .collect();
    }
    let edges: Vec<f64> = (0..=panels)
        .map(|k| rho * k as f64 / panels as f64)
        .collect();
    let radial = panel_nodes(&edges, order, closed);
    let m = 4 * panels * order;
    let dtheta = 2.0 * PI / m as f64;
    let mut out = Vec::with_capacity(radial.len() * m);
    for &(r, w) in &radial {
        for k in 0..m {
            let (s, c) = (k as f64 * dtheta).sin_cos();
            out.push(([r * c, r * s], w * r * dtheta));
        }
    }
    out
}

/// Edges on `[t0, t1]`: `uniform` equal panels plus geometric refinement
/// `b +- w0 2^k` around every break `b`.
fn break_graded_edges(t0: f64, t1: f64, uniform: usize, breaks: &[f64], w0: f64) -> Vec<f64> {
    let h = (t1 - t0) / uniform as f64;
    let mut edges: Vec<f64> = (0..=uniform).map(|k| t0 + h * k as f64).collect();
    for &b in breaks {
        if !(b >= t0 && b <= t1) {
            continue;
        }
        edges.push(b);
        let mut d = w0;
        while d < h {
            edges.push(b + d);
            edges.push(b - d);
            d *= 2.0;
        }
    }
    edges.retain(|e| *e >= t0 && *e <= t1);
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    edges
}

/// A scalar field on the half-space, evaluated one `x_n`-slab at a time so
/// separable fields only compute each factor once.
pub trait SpaceTimeField: Sync {
    fn n(&self) -> usize;

    /// Values at `tangential[i] x times[k]`, stored at `i * times.len() + k`.
    fn slab(&self, x_normal: f64, tangential: &[[f64; 2]], times: &[f64]) -> Result<Vec<f64>>;

    /// Factors `(a_i, b_k)` with slab value `a_i b_k`, for fields that
    /// separate on every slab. Lets reductions avoid the full tensor.
    fn factored_slab(
        &self,
        _x_normal: f64,
        _tangential: &[[f64; 2]],
        _times: &[f64],
    ) -> Option<Result<(Vec<f64>, Vec<f64>)>> {
        None
    }
}

fn located(tangential: &[f64], normal: f64, time: f64, e: Error) -> Error {
    match e {
        e @ Error::FieldEvaluation { .. } => e,
        e => Error::FieldEvaluation {
            tangential: tangential.to_vec(),
            normal,
            time,
            source: Box::new(e),
        },
    }
}

/// Field given by a closure of the full point.
pub struct PointwiseField<F> {
    n: usize,
    f: F,
}

impl<F> PointwiseField<F>
where
    F: Fn(&SpaceTimePoint) -> Result<f64> + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> SpaceTimeField for PointwiseField<F>
where
    F: Fn(&SpaceTimePoint) -> Result<f64> + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn slab(&self, x_normal: f64, tangential: &[[f64; 2]], times: &[f64]) -> Result<Vec<f64>> {
        let d = self.n - 1;
        let mut out = Vec::with_capacity(tangential.len() * times.len());
        for x in tangential {
            for &t in times {
                let v = SpaceTimePoint::new(x[..d].to_vec(), x_normal, t)
                    .and_then(|p| (self.f)(&p))
                    .map_err(|e| located(&x[..d], x_normal, t, e))?;
                out.push(v);
            }
        }
        Ok(out)
    }
}

/// `spatial(x', x_n) * temporal(x_n, t)`.
///
/// A spatial failure is reported with `t = NaN`, a temporal one with an
/// empty tangential coordinate.
pub struct ProductField<S, T> {
    n: usize,
    spatial: S,
    temporal: T,
}

impl<S, T> ProductField<S, T>
where
    S: Fn(&[f64], f64) -> Result<f64> + Sync,
    T: Fn(f64, f64) -> Result<f64> + Sync,
{
    pub fn new(n: usize, spatial: S, temporal: T) -> Self {
        Self {
            n,
            spatial,
            temporal,
        }
    }
}

impl<S, T> SpaceTimeField for ProductField<S, T>
where
    S: Fn(&[f64], f64) -> Result<f64> + Sync,
    T: Fn(f64, f64) -> Result<f64> + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn slab(&self, x_normal: f64, tangential: &[[f64; 2]], times: &[f64]) -> Result<Vec<f64>> {
        let (space, time) = self.factors(x_normal, tangential, times)?;
        Ok(outer(&space, &time))
    }

    fn factored_slab(
        &self,
        x_normal: f64,
        tangential: &[[f64; 2]],
        times: &[f64],
    ) -> Option<Result<(Vec<f64>, Vec<f64>)>> {
        Some(self.factors(x_normal, tangential, times))
    }
}

impl<S, T> ProductField<S, T>
where
    S: Fn(&[f64], f64) -> Result<f64> + Sync,
    T: Fn(f64, f64) -> Result<f64> + Sync,
{
    fn factors(
        &self,
        x_normal: f64,
        tangential: &[[f64; 2]],
        times: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.n - 1;
        let space = tangential
            .iter()
            .map(|x| {
                (self.spatial)(&x[..d], x_normal)
                    .map_err(|e| located(&x[..d], x_normal, f64::NAN, e))
            })
            .collect::<Result<Vec<f64>>>()?;
        let time = if space.iter().all(|v| *v == 0.0) {
            vec![0.0; times.len()]
        } else {
            times
                .iter()
                .map(|&t| (self.temporal)(x_normal, t).map_err(|e| located(&[], x_normal, t, e)))
                .collect::<Result<Vec<f64>>>()?
        };
        Ok((space, time))
    }
}

fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Pointwise sum of fields.
pub struct SumField<'a> {
    parts: Vec<Box<dyn SpaceTimeField + 'a>>,
}

impl<'a> SumField<'a> {
    pub fn new(parts: Vec<Box<dyn SpaceTimeField + 'a>>) -> Result<Self> {
        let n = parts
            .first()
            .map(|p| p.n())
            .ok_or_else(|| invalid("empty field sum"))?;
        if parts.iter().any(|p| p.n() != n) {
            return Err(invalid("summed fields disagree on n"));
        }
        Ok(Self { parts })
    }
}

impl SpaceTimeField for SumField<'_> {
    fn n(&self) -> usize {
        self.parts[0].n()
    }

    fn slab(&self, x_normal: f64, tangential: &[[f64; 2]], times: &[f64]) -> Result<Vec<f64>> {
        let mut total = vec![0.0; tangential.len() * times.len()];
        for part in &self.parts {
            for (t, v) in total
                .iter_mut()
                .zip(part.slab(x_normal, tangential, times)?)
            {
                *t += v;
            }
        }
        Ok(total)
    }
}

/// Quantities of the boundary-layer component `w^{B,1} = C_1(x_n, t) psi(x')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerQuantity {
    Value,
    NormalDerivative,
    /// Euclidean norm of the full spatial gradient.
    GradientNorm,
}

/// `w^{B,1}` or one of its derivatives as a lattice field.
pub struct LayerField<'a> {
    pub data: &'a BoundaryData,
    pub q: QuadratureSpec,
    pub quantity: LayerQuantity,
}

impl SpaceTimeField for LayerField<'_> {
    fn n(&self) -> usize {
        self.data.n()
    }

    fn slab(&self, x_normal: f64, tangential: &[[f64; 2]], times: &[f64]) -> Result<Vec<f64>> {
        match self.quantity {
            LayerQuantity::Value | LayerQuantity::NormalDerivative => {
                let (a, b) = self
                    .factored_slab(x_normal, tangential, times)
                    .expect("separable")?;
                Ok(outer(&a, &b))
            }
            LayerQuantity::GradientNorm => {
                let psi = self.psi(x_normal, tangential)?;
                let (c1, c2) = (
                    self.layer(1, x_normal, times)?,
                    self.layer(2, x_normal, times)?,
                );
                let mut out = Vec::with_capacity(psi.len() * times.len());
                for (value, grad) in &psi {
                    let g2 = grad[0] * grad[0] + grad[1] * grad[1];
                    for (a, b) in c1.iter().zip(&c2) {
                        out.push((a * a * g2 + b * b * value * value).sqrt());
                    }
                }
                Ok(out)
            }
        }
    }

    fn factored_slab(
        &self,
        x_normal: f64,
        tangential: &[[f64; 2]],
        times: &[f64],
    ) -> Option<Result<(Vec<f64>, Vec<f64>)>> {
        let k = match self.quantity {
            LayerQuantity::Value => 1,
            LayerQuantity::NormalDerivative => 2,
            LayerQuantity::GradientNorm => return None,
        };
        Some((|| {
            let values: Vec<f64> = self
                .psi(x_normal, tangential)?
                .into_iter()
                .map(|p| p.0)
                .collect();
            Ok((values, self.layer(k, x_normal, times)?))
        })())
    }
}

impl LayerField<'_> {
    fn psi(&self, x_normal: f64, tangential: &[[f64; 2]]) -> Result<Vec<(f64, [f64; 2])>> {
        let d = self.n() - 1;
        tangential
            .iter()
            .map(|x| {
                psi_with_gradient(&x[..d], &self.data.spatial)
                    .map_err(|e| located(&x[..d], x_normal, f64::NAN, e))
            })
            .collect()
    }

    fn layer(&self, k: usize, x_normal: f64, times: &[f64]) -> Result<Vec<f64>> {
        times
            .iter()
            .map(|&t| {
                caloric_layer(k, x_normal, t, &self.data.temporal, &self.q)
                    .map_err(|e| located(&[], x_normal, t, e))
            })
            .collect()
    }
}

/// The instantaneous component `w^N` as a lattice field.
pub struct NewtonField<'a> {
    pub data: &'a BoundaryData,
}

impl SpaceTimeField for NewtonField<'_> {
    fn n(&self) -> usize {
        self.data.n()
    }

    fn slab(&self, x_normal: f64, tangential: &[[f64; 2]], times: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.factors(x_normal, tangential, times)?;
        Ok(outer(&a, &b))
    }

    fn factored_slab(
        &self,
        x_normal: f64,
        tangential: &[[f64; 2]],
        times: &[f64],
    ) -> Option<Result<(Vec<f64>, Vec<f64>)>> {
        Some(self.factors(x_normal, tangential, times))
    }
}

impl NewtonField<'_> {
    fn factors(
        &self,
        x_normal: f64,
        tangential: &[[f64; 2]],
        times: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.n() - 1;
        let c = -2.0 / sphere_area(self.n());
        let space = tangential
            .iter()
            .map(|x| {
                riesz_layer(&x[..d], x_normal, &self.data.spatial)
                    .map(|(v, _)| c * v)
                    .map_err(|e| located(&x[..d], x_normal, f64::NAN, e))
            })
            .collect::<Result<Vec<f64>>>()?;
        let time: Vec<f64> = times.iter().map(|&t| self.data.temporal.eval(t)).collect();
        Ok((space, time))
    }
}

/// `int |f|^p` over the region and its `p`-th root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpEstimate {
    pub integral: f64,
    pub norm: f64,
    pub nodes: usize,
}

fn check_field(field: &dyn SpaceTimeField, region: &RegionSpec) -> Result<()> {
    region.validate()?;
    if field.n() != region.n {
        return Err(invalid(format!(
            "field has n = {} but the region has n = {}",
            field.n(),
            region.n
        )));
    }
    Ok(())
}

/// Per-slab reduction over the lattice. Slabs run in parallel; their partial
/// results are combined in lattice order so the outcome does not depend on
/// scheduling.
/// A slab's values, kept factored when the field allows it.
enum SlabValues {
    Full(Vec<f64>),
    Factored(Vec<f64>, Vec<f64>),
}

fn reduce_slabs<R, F>(
    field: &dyn SpaceTimeField,
    region: &RegionSpec,
    closed: bool,
    per_slab: F,
) -> Result<Vec<(f64, R, usize)>>
where
    R: Send,
    F: Fn(&SlabValues, &[(f64, f64)], &[([f64; 2], f64)]) -> R + Sync,
{
    check_field(field, region)?;
    let order = region.resolution.order;
    // Points on the boundary x_n = 0 or t = 0 are limits, not lattice values.
    let mut normal = panel_nodes(&region.normal_edges(), order, closed);
    normal.retain(|x| x.0 > 0.0);
    let mut times = panel_nodes(&region.time_edges(), order, closed);
    times.retain(|t| t.0 > 0.0);
    let t_points: Vec<f64> = times.iter().map(|t| t.0).collect();
    normal
        .par_iter()
        .map(|&(x_n, w)| {
            let tangential = region.disc(x_n, closed);
            let points: Vec<[f64; 2]> = tangential.iter().map(|p| p.0).collect();
            let values = match field.factored_slab(x_n, &points, &t_points) {
                Some(f) => {
                    let (a, b) = f?;
                    SlabValues::Factored(a, b)
                }
                None => SlabValues::Full(field.slab(x_n, &points, &t_points)?),
            };
            let count = points.len() * t_points.len();
            Ok((w, per_slab(&values, &times, &tangential), count))
        })
        .collect()
}

/// `int_{region} |f|^p` by the tensor lattice of the region.
pub fn lp_integral(field: &dyn SpaceTimeField, p: f64, region: &RegionSpec) -> Result<LpEstimate> {
    if !(p >= 1.0) {
        return Err(invalid(format!("exponent {p} below 1")));
    }
    let slabs = reduce_slabs(
        field,
        region,
        false,
        |values, times, tangential| match values {
            SlabValues::Factored(a, b) => {
                let sa: f64 = a
                    .iter()
                    .zip(tangential)
                    .map(|(v, (_, w))| w * v.abs().powf(p))
                    .sum();
                let sb: f64 = b
                    .iter()
                    .zip(times)
                    .map(|(v, (_, w))| w * v.abs().powf(p))
                    .sum();
                sa * sb
            }
            SlabValues::Full(values) => {
                let mut sum = 0.0;
                for (i, (_, wx)) in tangential.iter().enumerate() {
                    let row = &values[i * times.len()..(i + 1) * times.len()];
                    let inner: f64 = row
                        .iter()
                        .zip(times)
                        .map(|(v, (_, wt))| wt * v.abs().powf(p))
                        .sum();
                    sum += wx * inner;
                }
                sum
            }
        },
    )?;
    let integral: f64 = slabs.iter().map(|(w, s, _)| w * s).sum();
    Ok(LpEstimate {
        integral,
        norm: integral.powf(1.0 / p),
        nodes: slabs.iter().map(|s| s.2).sum(),
    })
}

/// `(int_{region} |f|^p)^{1/p}`.
pub fn lp_norm_region(field: &dyn SpaceTimeField, p: f64, region: &RegionSpec) -> Result<f64> {
    Ok(lp_integral(field, p, region)?.norm)
}

/// `max |f|` over the lattice nodes of the region together with the panel
/// edges, so that rims and break times are sampled.
pub fn sup_region(field: &dyn SpaceTimeField, region: &RegionSpec) -> Result<f64> {
    let max_abs = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let slabs = reduce_slabs(field, region, true, |values, _, _| match values {
        SlabValues::Factored(a, b) => max_abs(a) * max_abs(b),
        SlabValues::Full(v) => max_abs(v),
    })?;
    Ok(slabs.iter().fold(0.0, |m: f64, s| m.max(s.1)))
}

/// `(int_{B_r^+, x_n > epsilon} |f(x', x_n)|^p dx)^{1/p}` on the spatial
/// part of the region's lattice.
pub fn lp_norm_ball<F>(f: F, p: f64, region: &RegionSpec) -> Result<f64>
where
    F: Fn(&[f64], f64) -> Result<f64> + Sync,
{
    let field = ProductField::new(region.n, f, |_, _| Ok(1.0));
    let (t0, t1) = region.time_interval();
    let flat = region
        .clone()
        .with_time_breaks([])
        .with_resolution(LatticeResolution {
            time: 1,
            order: region.resolution.order,
            ..region.resolution
        });
    Ok((lp_integral(&field, p, &flat)?.integral / (t1 - t0)).powf(1.0 / p))
}

/// Parameters of `int_a^b int_a^b |f(t) - f(s)|^p / |t - s|^{1 + p s}` over
/// `|t - s| > delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormRequest {
    pub smoothness: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

impl SeminormRequest {
    pub fn new(smoothness: f64, p: f64, a: f64, b: f64, delta: f64) -> Result<Self> {
        let r = Self {
            smoothness,
            p,
            a,
            b,
            delta,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.smoothness > 0.0 && self.smoothness < 1.0) {
            return Err(invalid("smoothness must lie in (0, 1)"));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(invalid("integrability must exceed 1"));
        }
        if !(self.b > self.a) {
            return Err(invalid("empty interval"));
        }
        if !(self.delta > 0.0 && self.delta < self.b - self.a) {
            return Err(invalid("diagonal cutoff must lie in (0, b - a)"));
        }
        Ok(())
    }

    /// `p s`.
    fn beta(&self) -> f64 {
        self.p * self.smoothness
    }
}

/// Gagliardo double integral of a temporal profile. Piecewise-constant
/// `char_sum` profiles use the exact block-pair formula.
pub fn gagliardo_seminorm(
    f: &TemporalProfile,
    req: &SeminormRequest,
    q: &QuadratureSpec,
) -> Result<f64> {
    req.validate()?;
    if let TemporalKind::CharSum { .. } = f.kind() {
        return Ok(f.amplitude().abs().powf(req.p) * indicator_seminorm(&f.blocks(), req));
    }
    gagliardo_seminorm_fn(|s| f.eval(s), &f.breakpoints(), req, q)
}

/// Gagliardo double integral of an arbitrary function by nested adaptive
/// quadrature; `breaks` are points where `f` is not smooth.
pub fn gagliardo_seminorm_fn<F>(
    f: F,
    breaks: &[f64],
    req: &SeminormRequest,
    q: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    req.validate()?;
    let (a, b, delta, p) = (req.a, req.b, req.delta, req.p);
    let expo = -1.0 - req.beta();
    let inner_q = q.scaled(0.1);
    // Symmetric in (t, s): integrate s > t + delta and double.
    let inner = |t: f64| -> Result<f64> {
        let ft = f(t);
        let mut pts = vec![t + delta, b];
        pts.extend(breaks.iter().copied());
        pts.sort_by(f64::total_cmp);
        pts.retain(|s| *s >= t + delta && *s <= b);
        Ok(integrate_pieces(
            |s| Ok((ft - f(s)).abs().powf(p) * (s - t).powf(expo)),
            &pts,
            &inner_q,
        )?
        .value)
    };
    let mut pts = vec![a, b - delta];
    pts.extend(breaks.iter().flat_map(|s| [*s, s - delta]));
    pts.sort_by(f64::total_cmp);
    pts.retain(|t| *t >= a && *t <= b - delta);
    Ok(2.0 * integrate_pieces(inner, &pts, q)?.value)
}

/// Second antiderivative of `u^{-1-beta} 1[u > delta]` vanishing with its
/// derivative at 0.
fn cutoff_antiderivative(u: f64, beta: f64, delta: f64) -> f64 {
    if u <= delta {
        return 0.0;
    }
    type Scalar = Box<dyn Fn(f64) -> f64>;
    let (h, dh): (Scalar, Scalar) = if beta == 1.0 {
        (Box::new(|v: f64| -v.ln()), Box::new(|v: f64| -1.0 / v))
    } else if beta == 0.0 {
        (Box::new(|v: f64| v * v.ln() - v), Box::new(|v: f64| v.ln()))
    } else {
        (
            Box::new(move |v: f64| v.powf(1.0 - beta) / (beta * (beta - 1.0))),
            Box::new(move |v: f64| -v.powf(-beta) / beta),
        )
    };
    h(u) - h(delta) - dh(delta) * (u - delta)
}

/// `int_I int_J k(|t - s|)` for disjoint intervals.
fn pair_integral(i: (f64, f64), j: (f64, f64), beta: f64, delta: f64) -> f64 {
    let ((a1, b1), (a2, b2)) = if i.1 <= j.0 { (i, j) } else { (j, i) };
    let g = |u: f64| cutoff_antiderivative(u, beta, delta);
    g(b2 - a1) - g(b2 - b1) - g(a2 - a1) + g(a2 - b1)
}

/// Seminorm of the indicator of a union of disjoint intervals: the integrand
/// is the kernel exactly when one of `t`, `s` lies in the union.
fn indicator_seminorm(blocks: &[(f64, f64)], req: &SeminormRequest) -> f64 {
    let mut inside: Vec<(f64, f64)> = blocks
        .iter()
        .map(|&(lo, hi)| (lo.max(req.a), hi.min(req.b)))
        .filter(|(lo, hi)| hi > lo)
        .collect();
    inside.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut gaps = Vec::with_capacity(inside.len() + 1);
    let mut cursor = req.a;
    for &(lo, hi) in &inside {
        if lo > cursor {
            gaps.push((cursor, lo));
        }
        cursor = hi;
    }
    if req.b > cursor {
        gaps.push((cursor, req.b));
    }
    let beta = req.beta();
    let mut total = 0.0;
    for &blk in &inside {
        for &gap in &gaps {
            total += pair_integral(blk, gap, beta, req.delta);
        }
    }
    2.0 * total
}

/// One truncation of the `char_sum` divergence sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergencePoint {
    pub k: usize,
    pub delta: f64,
    pub value: f64,
    /// `sum_{k' <= k} k'^{-(1+a)(3/2 - p/2)}`.
    pub companion: f64,
}

/// Seminorms of `char_sum(a, K)` at `s = 1/2 - 1/(2p)` on `(0, 1)` for
/// `K = 2, 4, 8, ..., <= k_max`, each with `delta` one tenth of the width of
/// block `K`.
pub fn charsum_divergence_curve(a: f64, p: f64, k_max: usize) -> Result<Vec<DivergencePoint>> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid("char_sum exponent must lie in (0, 1)"));
    }
    if !(p > 1.0 && p < 3.0) {
        return Err(invalid("the divergence curve needs 1 < p < 3"));
    }
    if k_max < 2 {
        return Err(invalid("k_max must be at least 2"));
    }
    let smoothness = 0.5 - 0.5 / p;
    let expo = -(1.0 + a) * (1.5 - 0.5 * p);
    let mut out = Vec::new();
    let mut k = 2;
    while k <= k_max {
        let g = TemporalProfile::char_sum(a, k)?;
        let (lo, hi) = *g.blocks().last().expect("k >= 1");
        let delta = 0.1 * (hi - lo);
        let req = SeminormRequest::new(smoothness, p, 0.0, 1.0, delta)?;
        let value = indicator_seminorm(&g.blocks(), &req);
        let companion = (1..=k).map(|j| (j as f64).powf(expo)).sum();
        out.push(DivergencePoint {
            k,
            delta,
            value,
            companion,
        });
        k *= 2;
    }
    Ok(out)
}

/// `K(t) = D^2 Gamma_1(1, t)`, so that `D^2 Gamma_1(x, t) = x^{-3} K(t / x^2)`.
pub fn kernel_k(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    heat_kernel_1d_deriv(2, 1.0, t).expect("order 2 is valid")
}

/// `K` continued to `Re t > 0`.
fn kernel_k_complex(t: Complex64) -> Complex64 {
    let c = (4.0 * PI).powf(-0.5);
    c * (0.25 * t.powf(-2.5) - 0.5 * t.powf(-1.5)) * (-0.25 / t).exp()
}

/// Antiderivative `Gamma_1(1, t)` of `K` vanishing at 0.
fn kernel_k_antiderivative(t: f64) -> f64 {
    heat_kernel_1d_deriv(0, 1.0, t).expect("order 0 is valid")
}

/// `int_0^T K` by quadrature plus the exact tail `-Gamma_1(1, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelMass {
    pub truncated: f64,
    pub tail: f64,
    pub total: f64,
}

pub fn kernel_k_mass(t_max: f64, q: &QuadratureSpec) -> Result<KernelMass> {
    if !(t_max > 0.0) {
        return Err(invalid("truncation must be positive"));
    }
    let mut pts = vec![0.0, t_max];
    pts.extend([1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0, 4.0, 16.0]);
    pts.sort_by(f64::total_cmp);
    pts.retain(|t| *t <= t_max);
    let truncated = integrate_pieces(|t| Ok(kernel_k(t)), &pts, q)?.value;
    let tail = -kernel_k_antiderivative(t_max);
    Ok(KernelMass {
        truncated,
        tail,
        total: truncated + tail,
    })
}

/// `K^(y)` by quadrature along the ray `t = u e^{-i pi/4}`, where both the
/// oscillation and the essential singularity at 0 decay.
pub fn khat(y: f64, q: &QuadratureSpec) -> Result<Complex64> {
    if y == 0.0 {
        return Ok(Complex64::new(kernel_k_mass(1e3, q)?.total, 0.0));
    }
    if y < 0.0 {
        return Ok(khat(-y, q)?.conj());
    }
    let rot = Complex64::from_polar(1.0, -0.25 * PI);
    let decay = 2.0 * PI * y * (0.25 * PI).sin();
    let u_max = 42.0 / decay;
    let integrand = |u: f64| {
        let t = u * rot;
        kernel_k_complex(t) * (Complex64::new(0.0, -2.0 * PI * y) * t).exp() * rot
    };
    let mut pts = vec![0.0, u_max];
    let mut b = 1e-3;
    while b < u_max {
        pts.push(b);
        b *= 4.0;
    }
    pts.extend([0.25 / decay, 1.0 / decay, 4.0 / decay]);
    pts.sort_by(f64::total_cmp);
    pts.retain(|u| *u <= u_max);
    let re = integrate_pieces(|u| Ok(integrand(u).re), &pts, q)?.value;
    let im = integrate_pieces(|u| Ok(integrand(u).im), &pts, q)?.value;
    Ok(Complex64::new(re, im))
}

/// Closed form `K^(y) = (k/2) e^{-k}`, `k = sqrt(2 pi i y)`; used to check
/// [`khat`].
pub fn khat_closed_form(y: f64) -> Complex64 {
    if y < 0.0 {
        return khat_closed_form(-y).conj();
    }
    let k = Complex64::new(0.0, 2.0 * PI * y).sqrt();
    0.5 * k * (-k).exp()
}

/// `int_0^{y_max} y^{-3/2} |K^(y)|^2 dy` with the numerical transform,
/// after `y = v^2`.
pub fn kernel_constant(y_max: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(y_max > 0.0) {
        return Err(invalid("truncation must be positive"));
    }
    let v_max = y_max.sqrt();
    let outer_q = q.scaled(10.0);
    let mut pts = vec![0.0, v_max];
    pts.extend([0.1, 0.3, 1.0, 2.0, 4.0]);
    pts.sort_by(f64::total_cmp);
    pts.retain(|v| *v <= v_max);
    Ok(integrate_pieces(
        |v| {
            let kh = khat(v * v, q)?;
            Ok(2.0 * kh.norm_sqr() / (v * v))
        },
        &pts,
        &outer_q,
    )?
    .value)
}

/// Discretization of the Plancherel comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelGrid {
    pub x_max: f64,
    pub t_max: f64,
    pub x_panels: usize,
    pub t_panels: usize,
    pub order: usize,
    /// FFT length for the `H^{1/4}` seminorm.
    pub samples: usize,
    /// Truncation of the kernel constant's integral.
    pub y_max: f64,
}

impl Default for PlancherelGrid {
    fn default() -> Self {
        Self {
            x_max: 16.0,
            t_max: 24.0,
            x_panels: 16,
            t_panels: 24,
            order: 6,
            samples: 4096,
            y_max: 200.0,
        }
    }
}

impl PlancherelGrid {
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            x_panels: self.x_panels * factor,
            t_panels: self.t_panels * factor,
            samples: self.samples * factor,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_max > 0.0 && self.t_max > 0.0 && self.y_max > 0.0) {
            return Err(invalid("Plancherel truncations must be positive"));
        }
        if self.x_panels == 0 || self.t_panels == 0 || self.order == 0 || self.samples < 16 {
            return Err(invalid("Plancherel grid too coarse"));
        }
        Ok(())
    }
}

/// Share of the truncated double integral from `t > t_max / 2` above which
/// the time truncation is considered unconverged.
pub const TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    /// `int int |caloric_layer(2)|^2 dx_n dt` on the truncated domain.
    pub lhs: f64,
    /// `int |g^(tau)|^2 |tau|^{1/2} d tau`.
    pub h_quarter: f64,
    /// [`kernel_constant`] at the grid's truncation.
    pub kernel_constant: f64,
    pub rhs_fraction: f64,
    /// `lhs / rhs_fraction`; `None` when the profile vanishes.
    pub ratio: Option<f64>,
    pub tail_fraction: f64,
    pub tail_converged: bool,
}

/// Compares the `L^2` norm of the normal-derivative layer with the
/// `H^{1/4}` seminorm of its density.
pub fn plancherel_check(
    g: &TemporalProfile,
    grid: &PlancherelGrid,
    q: &QuadratureSpec,
) -> Result<PlancherelReport> {
    grid.validate()?;
    let (s0, s1) = g.support();
    if !(s0.is_finite() && s1.is_finite() && s0 >= 0.0) {
        return Err(invalid(
            "the Plancherel check needs compact support in [0, inf)",
        ));
    }
    if g.is_zero() {
        return Ok(PlancherelReport {
            lhs: 0.0,
            h_quarter: 0.0,
            kernel_constant: 0.0,
            rhs_fraction: 0.0,
            ratio: None,
            tail_fraction: 0.0,
            tail_converged: true,
        });
    }
    let x_edges = graded_edges(0.0, grid.x_max, 1e-2, 1.5, grid.x_panels);
    let x_nodes = composite_legendre(&x_edges, grid.order);
    let mut breaks = g.breakpoints();
    breaks.push(grid.t_max / 2.0);
    let t_edges = break_graded_edges(0.0, grid.t_max, grid.t_panels, &breaks, 1e-4);
    let t_nodes = composite_legendre(&t_edges, grid.order);
    let slabs = x_nodes
        .par_iter()
        .map(|&(x, wx)| {
            let mut head = 0.0;
            let mut tail = 0.0;
            for &(t, wt) in &t_nodes {
                let u = caloric_layer(2, x, t, g, q).map_err(|e| located(&[], x, t, e))?;
                if t > grid.t_max / 2.0 {
                    tail += wt * u * u;
                } else {
                    head += wt * u * u;
                }
            }
            Ok((wx * head, wx * tail))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let head: f64 = slabs.iter().map(|s| s.0).sum();
    let tail: f64 = slabs.iter().map(|s| s.1).sum();
    let lhs = head + tail;
    let h_quarter = quarter_seminorm(|s| g.eval(s), s0, s1, grid.samples);
    let kc = kernel_constant(grid.y_max, q)?;
    let rhs_fraction = h_quarter * kc;
    let tail_fraction = if lhs > 0.0 { tail / lhs } else { 0.0 };
    Ok(PlancherelReport {
        lhs,
        h_quarter,
        kernel_constant: kc,
        rhs_fraction,
        ratio: (rhs_fraction > 0.0).then(|| lhs / rhs_fraction),
        tail_fraction,
        tail_converged: tail_fraction < TAIL_TOLERANCE,
    })
}

/// `int |f^(tau)|^2 |tau|^{1/2} d tau` for `f` supported in `[a, b]`, by
/// a zero-padded DFT of `samples` points over a window four times the
/// support. The frequency sum carries the endpoint correction for the
/// `|tau|^{1/2}` cusp at the origin.
pub fn quarter_seminorm<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> f64 {
    let len = 4.0 * (b - a);
    let h = len / samples as f64;
    let mut buf: Vec<Complex64> = (0..samples)
        .map(|j| Complex64::new(f(a + j as f64 * h), 0.0))
        .collect();
    FftPlanner::new()
        .plan_fft_forward(samples)
        .process(&mut buf);
    let dtau = 1.0 / len;
    let sum: f64 = buf
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let kk = if k <= samples / 2 { k } else { samples - k } as f64;
            (h * h) * c.norm_sqr() * (kk * dtau).sqrt() * dtau
        })
        .sum();
    // sum_{k>=1} F(k d) (k d)^{1/2} d = int_0^inf F tau^{1/2} + zeta(-1/2) F(0) d^{3/2} + ...
    const ZETA_MINUS_HALF: f64 = -0.207_886_224_977_354_6;
    sum - 2.0 * ZETA_MINUS_HALF * (h * h) * buf[0].norm_sqr() * dtau.powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::SpatialProfile;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constant_field_gives_volume() {
        let region = RegionSpec::new(0.5, 0.0, 3).unwrap();
        let field = PointwiseField::new(3, |_| Ok(1.0));
        let vol = 2.0 / 3.0 * PI * 0.125 * 0.25;
        let v = lp_norm_region(&field, 2.0, &region).unwrap();
        assert!((v - vol.sqrt()).abs() < 1e-6, "{v} {}", vol.sqrt());
    }

    #[test]
    fn inverse_root_field_matches_closed_form() {
        // int_{x_n > eps} x_n^{-1} over Q_r^+ = pi r^2 (r^2 ln(r/eps) - (r^2 - eps^2)/2).
        let r: f64 = 1.0;
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let region = RegionSpec::new(r, eps, 3).unwrap();
            let field = ProductField::new(3, |_: &[f64], x: f64| Ok(x.powf(-0.5)), |_, _| Ok(1.0));
            let got = lp_integral(&field, 2.0, &region).unwrap().integral;
            let exact = PI * r * r * (r * r * (r / eps).ln() - 0.5 * (r * r - eps * eps));
            assert!((got / exact - 1.0).abs() < 1e-6, "{eps}: {got} {exact}");
        }
    }

    #[test]
    fn two_dimensional_region() {
        // n = 2: B_r^+ is a half disc.
        let region = RegionSpec::new(0.8, 0.0, 2)
            .unwrap()
            .with_resolution(LatticeResolution::default().refined(2));
        let field = ProductField::new(
            2,
            |x: &[f64], xn: f64| Ok(x[0] * x[0] + xn),
            |_, t: f64| Ok(t),
        );
        let got = lp_integral(&field, 1.0, &region).unwrap().integral;
        // |x_1^2 + x_n| = x_1^2 + x_n; int over half disc of x_1^2 is pi r^4/8,
        // of x_n is 2 r^3/3; time factor int_{1-r^2}^1 t dt.
        let r: f64 = 0.8;
        let time = 0.5 * (1.0 - (1.0 - r * r).powi(2));
        let exact = (PI * r.powi(4) / 8.0 + 2.0 * r.powi(3) / 3.0) * time;
        assert!((got / exact - 1.0).abs() < 1e-9, "{got} {exact}");
    }

    #[test]
    fn sup_sees_peak() {
        let region = RegionSpec::new(1.0, 0.0, 3).unwrap();
        let field = ProductField::new(3, |_: &[f64], x: f64| Ok(1.0 - x), |_, t: f64| Ok(t));
        let s = sup_region(&field, &region).unwrap();
        assert!(s > 0.99 && s <= 1.0);
    }

    #[test]
    fn evaluation_failure_carries_location() {
        let region = RegionSpec::new(0.5, 0.0, 3).unwrap();
        let field = PointwiseField::new(3, |p: &SpaceTimePoint| {
            if p.t > 0.9 {
                Err(invalid("boom"))
            } else {
                Ok(1.0)
            }
        });
        match lp_norm_region(&field, 2.0, &region) {
            Err(Error::FieldEvaluation { time, .. }) => assert!(time > 0.9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(lp_norm_region(&field, 0.5, &region).is_err());
        assert!(RegionSpec::new(0.5, 0.6, 3).is_err());
    }

    #[test]
    fn ball_norm_of_constant() {
        let region = RegionSpec::new(0.5, 0.0, 3).unwrap();
        let v = lp_norm_ball(|_, _| Ok(2.0), 2.0, &region).unwrap();
        let vol = 2.0 / 3.0 * PI * 0.125;
        assert!((v - 2.0 * vol.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn layer_field_matches_pointwise_evaluation() {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0)
            .unwrap()
            .with_sector(PI / 2.0)
            .unwrap();
        let data = BoundaryData::new(g.default_rule(), TemporalProfile::char_sum(0.5, 3).unwrap());
        let x = [[0.2, 0.1], [-0.1, 0.3]];
        let times = [0.62, 0.9];
        for quantity in [LayerQuantity::Value, LayerQuantity::NormalDerivative] {
            let field = LayerField {
                data: &data,
                q: q(),
                quantity,
            };
            let slab = field.slab(0.05, &x, &times).unwrap();
            for (i, xi) in x.iter().enumerate() {
                for (k, &t) in times.iter().enumerate() {
                    let p = SpaceTimePoint::new(xi.to_vec(), 0.05, t).unwrap();
                    let direct = match quantity {
                        LayerQuantity::Value => crate::solution::w_b1(&p, &data, &q()).unwrap(),
                        _ => crate::solution::dxn_w_b1(&p, &data, &q()).unwrap(),
                    };
                    assert!((slab[i * 2 + k] - direct).abs() < 1e-12 * (1.0 + direct.abs()));
                }
            }
        }
        let nf = NewtonField { data: &data }.slab(0.05, &x, &times).unwrap();
        let p = SpaceTimePoint::new(x[1].to_vec(), 0.05, 0.62).unwrap();
        assert!((nf[2] - crate::solution::w_n(&p, &data).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn constant_profile_has_zero_seminorm() {
        let g = TemporalProfile::tabulated(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        let req = SeminormRequest::new(0.25, 2.0, 0.0, 1.0, 1e-3).unwrap();
        assert_eq!(gagliardo_seminorm(&g, &req, &q()).unwrap(), 0.0);
    }

    #[test]
    fn linear_profile_seminorm_matches_closed_form() {
        // |t - s|^2 / |t - s|^{3/2}: inner integral closed form, outer by quadrature.
        let req = SeminormRequest::new(0.25, 2.0, 0.0, 1.0, 1e-4).unwrap();
        let got = gagliardo_seminorm_fn(|t| t, &[], &req, &q()).unwrap();
        let d = req.delta;
        let oracle = crate::quadrature::integrate(
            |t| Ok(((1.0 - t).powf(1.5) - d.powf(1.5)) / 1.5),
            0.0,
            1.0 - d,
            &q(),
        )
        .unwrap()
        .value
            * 2.0;
        assert!((got - oracle).abs() < 1e-8, "{got} {oracle}");
    }

    #[test]
    fn block_formula_matches_nested_quadrature() {
        let g = TemporalProfile::char_sum(0.5, 2).unwrap();
        let blocks = g.blocks();
        let inside = |s: f64| blocks.iter().any(|&(lo, hi)| s > lo && s < hi) as u8 as f64;
        for &(p, delta) in &[(2.5, 5e-3), (3.5, 1e-2), (2.0, 1e-3)] {
            let req = SeminormRequest::new(0.5 - 0.5 / p, p, 0.0, 1.0, delta).unwrap();
            let exact = gagliardo_seminorm(&g, &req, &q()).unwrap();
            let numeric = gagliardo_seminorm_fn(inside, &g.breakpoints(), &req, &q()).unwrap();
            assert!(
                (exact / numeric - 1.0).abs() < 1e-7,
                "{p}: {exact} {numeric}"
            );
        }
    }

    #[test]
    fn char_sum_seminorm_diverges_for_large_p() {
        let g = TemporalProfile::char_sum(0.5, 4).unwrap();
        let mut prev = 0.0;
        let mut prev_ratio = f64::INFINITY;
        for k in 0..6 {
            let delta = 1e-3 / 2f64.powi(k);
            let req = SeminormRequest::new(0.5 - 1.0 / 7.0, 3.5, 0.0, 1.0, delta).unwrap();
            let v = gagliardo_seminorm(&g, &req, &q()).unwrap();
            if k > 0 {
                let ratio = v / prev;
                assert!(ratio > 1.2, "{ratio}");
                assert!(ratio <= prev_ratio * 1.01);
                prev_ratio = ratio;
            }
            prev = v;
        }
    }

    #[test]
    fn divergence_curve_tracks_companion() {
        let curve = charsum_divergence_curve(0.5, 2.5, 64).unwrap();
        assert_eq!(
            curve.iter().map(|c| c.k).collect::<Vec<_>>(),
            vec![2, 4, 8, 16, 32, 64]
        );
        let ks: Vec<f64> = curve.iter().map(|c| c.k as f64).collect();
        let v: Vec<f64> = curve.iter().map(|c| c.value).collect();
        let c: Vec<f64> = curve.iter().map(|c| c.companion).collect();
        let sv = crate::fit::log_log_fit(&ks, &v).unwrap().slope;
        let sc = crate::fit::log_log_fit(&ks, &c).unwrap().slope;
        assert!((sv / sc - 1.0).abs() < 0.1, "{sv} {sc}");
        assert!(charsum_divergence_curve(0.5, 3.0, 8).is_err());
    }

    #[test]
    fn kernel_has_zero_mass() {
        let m = kernel_k_mass(50.0, &q()).unwrap();
        assert!(m.total.abs() < 1e-8, "{m:?}");
    }

    #[test]
    fn numerical_transform_matches_closed_form() {
        for &y in &[0.01, 0.3, 2.0, 17.0] {
            let a = khat(y, &q()).unwrap();
            let b = khat_closed_form(y);
            assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()), "{y}: {a} {b}");
        }
        assert!((khat(-0.3, &q()).unwrap() - khat_closed_form(0.3).conj()).norm() < 1e-8);
    }

    #[test]
    fn quarter_seminorm_of_gaussian() {
        // f = e^{-pi t^2} is its own transform; int e^{-2 pi tau^2} |tau|^{1/2}
        // = Gamma(3/4) (2 pi)^{-3/4}.
        let f = |t: f64| (-PI * (t - 5.0) * (t - 5.0)).exp();
        let got = quarter_seminorm(f, 0.0, 10.0, 8192);
        let exact = 1.225_416_702_465_178 * (2.0 * PI).powf(-0.75);
        assert!((got - exact).abs() < 1e-5 * exact, "{got} {exact}");
    }

    #[test]
    fn zero_profile_plancherel_is_flagged() {
        let g = TemporalProfile::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let r = plancherel_check(&g, &PlancherelGrid::default(), &q()).unwrap();
        assert_eq!((r.lhs, r.rhs_fraction, r.ratio), (0.0, 0.0, None));
    }
}
