//! Adaptive and fixed quadrature rules.
//!
//! The adaptive integrator is a globally adaptive Gauss–Kronrod (7, 15)
//! scheme in the style of QUADPACK's `qag`/`qagp`: the interval with the
//! largest error estimate is bisected until the summed error satisfies the
//! requested tolerance. Integrands are fallible so that nested integrals can
//! propagate inner failures with `?`.
//!
//! Fixed Gauss–Legendre and Gauss–Hermite rules come from `gauss-quad` and
//! are cached per order for the lifetime of the process.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::num::NonZeroUsize;
use std::sync::{Mutex, OnceLock};

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerances and limits shared by every numerical integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Use `s = t - tau^2` in time convolutions so the `(t - s)^{-1/2}`
    /// endpoint behaviour becomes smooth.
    pub singular_substitution: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 4000,
            singular_substitution: true,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// A copy with both tolerances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }

    pub fn with_substitution(self, on: bool) -> Self {
        Self {
            singular_substitution: on,
            ..self
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Sum of |f| times weights, used for the roundoff floor.
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        value,
        error: err,
        magnitude: res_abs,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_pieces(f, &[a, b], spec)
}

/// Integrates `f` over `[points[0], points.last()]`, with the interior points
/// used as initial panel boundaries. Points outside the range or out of order
/// are ignored, so callers can pass raw candidate breakpoints.
pub fn integrate_pieces<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (a, b) = match (points.first(), points.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(invalid("integration needs at least two points")),
    };
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > lo && *p < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut settled_value = 0.0;
    let mut settled_error = 0.0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let panel = kronrod15(&mut f, w[0], w[1])?;
        evaluations += 15;
        heap.push(panel);
    }

    let mut subdivisions = heap.len();
    let totals = |heap: &BinaryHeap<Panel>, sv: f64, se: f64| {
        heap.iter().fold((sv, se, 0.0), |(v, e, m), p| {
            (v + p.value, e + p.error, m + p.magnitude)
        })
    };
    let (mut value, mut error, mut magnitude) = totals(&heap, 0.0, 0.0);
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        let roundoff_floor = 1e3 * f64::EPSILON * magnitude;
        if error <= tol || error <= roundoff_floor || heap.is_empty() {
            // Running sums drift; confirm with a fresh reduction.
            let (v, e, m) = totals(&heap, settled_value, settled_error);
            (value, error, magnitude) = (v, e, m);
            let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
            if error <= tol || error <= 1e3 * f64::EPSILON * magnitude || heap.is_empty() {
                return Ok(Estimate {
                    value: sign * value,
                    abs_error: error,
                    evaluations,
                });
            }
        }
        if subdivisions >= spec.max_subdivisions {
            let (v, e, _) = totals(&heap, settled_value, settled_error);
            return Err(Error::Quadrature {
                estimate: sign * v,
                residual: e,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        // Panels that can no longer be bisected in floating point are frozen.
        let scale = worst.a.abs().max(worst.b.abs());
        if worst.b - worst.a <= 100.0 * f64::EPSILON * scale + 1e3 * f64::MIN_POSITIVE
            || mid <= worst.a
            || mid >= worst.b
        {
            settled_value += worst.value;
            settled_error += worst.error;
            continue;
        }
        let left = kronrod15(&mut f, worst.a, mid)?;
        let right = kronrod15(&mut f, mid, worst.b)?;
        evaluations += 30;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
    }
}

type RuleCache = OnceLock<Mutex<HashMap<usize, &'static [(f64, f64)]>>>;

fn cached_rule(
    table: &'static RuleCache,
    order: usize,
    build: impl FnOnce(NonZeroUsize) -> Vec<(f64, f64)>,
) -> &'static [(f64, f64)] {
    let order = order.max(1);
    let map = table.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().expect("rule cache poisoned");
    guard.entry(order).or_insert_with(|| {
        let nodes = build(NonZeroUsize::new(order).expect("order >= 1"));
        Box::leak(nodes.into_boxed_slice())
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, sorted by node.
pub fn legendre(order: usize) -> &'static [(f64, f64)] {
    static TABLE: RuleCache = OnceLock::new();
    cached_rule(&TABLE, order, |n| {
        let mut nodes = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        nodes
    })
}

/// Gauss–Hermite nodes and weights for the weight `exp(-x^2)` on the real line.
pub fn hermite(order: usize) -> &'static [(f64, f64)] {
    static TABLE: RuleCache = OnceLock::new();
    cached_rule(&TABLE, order, |n| {
        let mut nodes = GaussHermite::new(n).as_node_weight_pairs().to_vec();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        nodes
    })
}

/// Nodes and weights of the composite Gauss–Legendre rule of the given order
/// on the panels delimited by consecutive `edges`.
pub fn composite_legendre(edges: &[f64], order: usize) -> Vec<(f64, f64)> {
    let rule = legendre(order);
    let mut out = Vec::with_capacity(edges.len().saturating_sub(1) * rule.len());
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        out.extend(rule.iter().map(|&(x, wt)| (mid + half * x, half * wt)));
    }
    out
}

/// Panel edges on `[a, b]` refined geometrically toward `a`: the first panel
/// has width `first`, each subsequent one is `ratio` times wider, and the
/// remainder is split into `uniform` equal panels.
pub fn graded_edges(a: f64, b: f64, first: f64, ratio: f64, uniform: usize) -> Vec<f64> {
    let mut edges = vec![a];
    let mut width = first.max(0.0);
    if width > 0.0 && ratio > 1.0 {
        let limit = a + 0.5 * (b - a);
        let mut x = a + width;
        while x < limit {
            edges.push(x);
            width *= ratio;
            x += width;
        }
    }
    let start = *edges.last().expect("non-empty");
    let n = uniform.max(1);
    for k in 1..=n {
        edges.push(start + (b - start) * k as f64 / n as f64);
    }
    edges
}

/// Geometry of a tangential integration region, described in polar
/// coordinates about `origin` in dimension 1 or 2.
///
/// The region is `{ y : r0 <= |y - origin| <= r1 }`, optionally intersected
/// with a ball (`inside`) and with the complement of another ball
/// (`outside`). In dimension 1 the "angles" are the two half-lines.
#[derive(Debug, Clone)]
pub struct PolarRegion {
    pub dim: usize,
    pub origin: [f64; 2],
    pub r0: f64,
    pub r1: f64,
    pub inside: Option<([f64; 2], f64)>,
    pub outside: Option<([f64; 2], f64)>,
    pub radial_breaks: Vec<f64>,
}

impl PolarRegion {
    pub fn annulus(dim: usize, origin: [f64; 2], r0: f64, r1: f64) -> Self {
        Self {
            dim,
            origin,
            r0,
            r1,
            inside: None,
            outside: None,
            radial_breaks: Vec::new(),
        }
    }

    pub fn within(mut self, center: [f64; 2], radius: f64) -> Self {
        self.inside = Some((center, radius));
        self
    }

    pub fn excluding(mut self, center: [f64; 2], radius: f64) -> Self {
        self.outside = Some((center, radius));
        self
    }

    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.radial_breaks.extend(breaks);
        self
    }

    fn offset(&self, c: [f64; 2]) -> (f64, f64) {
        let dx = c[0] - self.origin[0];
        let dy = if self.dim == 2 {
            c[1] - self.origin[1]
        } else {
            0.0
        };
        ((dx * dx + dy * dy).sqrt(), dy.atan2(dx))
    }

    /// Half-angle of the arc of the circle of radius `r` about the origin
    /// that lies inside the ball `(c, radius)`, in `[0, pi]`.
    fn half_angle(&self, r: f64, c: [f64; 2], radius: f64) -> f64 {
        let (d, _) = self.offset(c);
        if d == 0.0 || r == 0.0 {
            return if r < radius {
                std::f64::consts::PI
            } else {
                0.0
            };
        }
        let cosine = (d * d + r * r - radius * radius) / (2.0 * d * r);
        cosine.clamp(-1.0, 1.0).acos()
    }

    /// Angular intervals at radius `r` (dimension 2).
    fn arcs(&self, r: f64) -> Vec<(f64, f64)> {
        use std::f64::consts::PI;
        let mut arcs = match self.inside {
            Some((c, radius)) => {
                let beta = self.half_angle(r, c, radius);
                if beta <= 0.0 {
                    return Vec::new();
                }
                let (_, phi) = self.offset(c);
                vec![(phi - beta, phi + beta)]
            }
            None => vec![(-PI, PI)],
        };
        if let Some((e, radius)) = self.outside {
            let beta = self.half_angle(r, e, radius);
            if beta > 0.0 {
                let (_, phi) = self.offset(e);
                let mut kept = Vec::new();
                for (lo, hi) in arcs {
                    // Work modulo 2*pi relative to the excluded direction.
                    let shift = ((lo - phi + PI).rem_euclid(2.0 * PI)) - PI;
                    let (a, b) = (shift, shift + (hi - lo));
                    // Excluded set: [-beta, beta] + 2 pi k.
                    let mut pieces = vec![(a, b)];
                    for k in -1..=2 {
                        let (xa, xb) = (-beta + 2.0 * PI * k as f64, beta + 2.0 * PI * k as f64);
                        pieces = pieces
                            .into_iter()
                            .flat_map(|(u, v)| {
                                let mut out = Vec::new();
                                if xb <= u || xa >= v {
                                    out.push((u, v));
                                } else {
                                    if xa > u {
                                        out.push((u, xa));
                                    }
                                    if xb < v {
                                        out.push((xb, v));
                                    }
                                }
                                out
                            })
                            .collect();
                    }
                    kept.extend(
                        pieces
                            .into_iter()
                            .filter(|(u, v)| v - u > 0.0)
                            .map(|(u, v)| (u + phi, v + phi)),
                    );
                }
                arcs = kept;
            }
        }
        arcs
    }

    fn contains_1d(&self, y: f64) -> bool {
        let inside = self
            .inside
            .map_or(true, |(c, radius)| (y - c[0]).abs() < radius);
        let outside = self
            .outside
            .map_or(true, |(e, radius)| (y - e[0]).abs() > radius);
        inside && outside
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.r0, self.r1];
        for ball in [self.inside, self.outside].into_iter().flatten() {
            let (d, _) = self.offset(ball.0);
            pts.push(d - ball.1);
            pts.push(d + ball.1);
            pts.push(d);
        }
        pts.extend(self.radial_breaks.iter().copied());
        let mut pts: Vec<f64> = pts
            .into_iter()
            .filter(|p| *p >= self.r0 && *p <= self.r1)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Integrates `f` over the region. The integrand receives the Cartesian
    /// point (only the first `dim` entries are meaningful).
    pub fn integrate<F>(&self, mut f: F, spec: &QuadratureSpec) -> Result<Estimate>
    where
        F: FnMut([f64; 2]) -> Result<f64>,
    {
        if self.r1 <= self.r0 {
            return Ok(Estimate {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
            });
        }
        let pts = self.breakpoints();
        let o = self.origin;
        let mut evaluations = 0;
        let inner_spec = *spec;
        let radial = |r: f64| -> Result<f64> {
            if self.dim == 1 {
                let mut total = 0.0;
                for s in [1.0, -1.0] {
                    let y = o[0] + s * r;
                    if self.contains_1d(y) {
                        total += f([y, 0.0])?;
                    }
                }
                return Ok(total);
            }
            let mut total = 0.0;
            for (lo, hi) in self.arcs(r) {
                let est = integrate(
                    |theta| {
                        let (s, c) = theta.sin_cos();
                        Ok(f([o[0] + r * c, o[1] + r * s])? * r)
                    },
                    lo,
                    hi,
                    &inner_spec,
                )?;
                evaluations += est.evaluations;
                total += est.value;
            }
            Ok(total)
        };
        let est = integrate_pieces(radial, &pts, spec)?;
        Ok(Estimate {
            evaluations: est.evaluations + evaluations,
            ..est
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| Ok(x * x * x - 2.0 * x + 1.0), -1.0, 3.0, &spec()).unwrap();
        assert!((est.value - 16.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // int_0^1 x^{-1/2} = 2
        let est = integrate(|x| Ok(x.powf(-0.5)), 0.0, 1.0, &spec()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x| Ok(x.exp()), 0.0, 1.0, &spec()).unwrap().value;
        let b = integrate(|x| Ok(x.exp()), 1.0, 0.0, &spec()).unwrap().value;
        assert_eq!(a, -b);
    }

    #[test]
    fn budget_exhaustion_reports_residual() {
        let tight = QuadratureSpec::new(1e-300, 1e-300, 3).unwrap();
        let err = integrate(|x| Ok((50.0 * x).sin() / x.sqrt()), 0.0, 10.0, &tight).unwrap_err();
        match err {
            Error::Quadrature { residual, .. } => assert!(residual > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-6, 10).is_err());
        assert!(QuadratureSpec::new(1e-6, 1e-6, 0).is_err());
    }

    #[test]
    fn legendre_and_hermite_rules() {
        let s: f64 = legendre(12).iter().map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let h: f64 = hermite(30).iter().map(|(x, w)| w * x * x).sum();
        assert!((h - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn composite_rule_sums_widths() {
        let edges = graded_edges(0.0, 1.0, 1e-4, 2.0, 4);
        let nodes = composite_legendre(&edges, 5);
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(edges.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn polar_disc_area_and_moment() {
        let region = PolarRegion::annulus(2, [0.3, -0.2], 0.0, 1.5);
        let area = region.integrate(|_| Ok(1.0), &spec()).unwrap().value;
        assert!((area - PI * 2.25).abs() < 1e-10);
        let mx = region.integrate(|y| Ok(y[0]), &spec()).unwrap().value;
        assert!((mx - 0.3 * PI * 2.25).abs() < 1e-10);
    }

    #[test]
    fn polar_region_with_inside_and_outside_balls() {
        // Unit disc about (2, 0) seen from the origin, minus a disc of
        // radius 0.25 about (2.5, 0): area pi - pi/16.
        let region = PolarRegion::annulus(2, [0.0, 0.0], 0.0, 4.0)
            .within([2.0, 0.0], 1.0)
            .excluding([2.5, 0.0], 0.25);
        let area = region.integrate(|_| Ok(1.0), &spec()).unwrap().value;
        assert!((area - (PI - PI / 16.0)).abs() < 1e-8, "{area}");
    }

    #[test]
    fn polar_region_in_one_dimension() {
        let region = PolarRegion::annulus(1, [1.0, 0.0], 0.5, 2.0).excluding([2.6, 0.0], 0.2);
        // [-1, 0.5] U [1.5, 2.4] U [2.8, 3]
        let len = region.integrate(|_| Ok(1.0), &spec()).unwrap().value;
        assert!((len - (1.5 + 0.9 + 0.2)).abs() < 1e-9, "{len}");
    }
}
