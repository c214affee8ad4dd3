//! Boundary-data families `g(y', s) = a g_S(y') g_T(s)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::quadrature::legendre;

/// `exp(1 - 1/(1 - u^2))` on `|u| < 1`, zero elsewhere; peak value 1 at 0.
fn bump(u: f64) -> f64 {
    let w = 1.0 - u * u;
    if w <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / w).exp()
    }
}

fn bump_prime(u: f64) -> f64 {
    let w = 1.0 - u * u;
    if w <= 0.0 {
        0.0
    } else {
        bump(u) * (-2.0 * u / (w * w))
    }
}

/// Support shape of a spatial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Annulus intersected with the box `lo < y_i < hi` in every coordinate,
    /// where `lo = -outer` and `hi = -inner`.
    BoxAnnulus,
    /// Plain annulus `inner < |y'| < outer`.
    RadialAnnulus,
}

/// A smooth nonnegative bump supported in an annulus of `R^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialProfile {
    /// Tangential dimension `n - 1`.
    pub dim: usize,
    pub geometry: Geometry,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Optional angular window of this half-angle about the direction `-e_1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector_half_angle: Option<f64>,
}

impl SpatialProfile {
    /// The box-annulus set `3 < |y'| < 4 sqrt(n)`, `-4 sqrt(n) < y_i < -3`.
    pub fn box_annulus(n: usize) -> Result<Self> {
        let p = Self {
            dim: n.saturating_sub(1),
            geometry: Geometry::BoxAnnulus,
            inner_radius: 3.0,
            outer_radius: 4.0 * (n as f64).sqrt(),
            sector_half_angle: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn radial_annulus(n: usize, inner: f64, outer: f64) -> Result<Self> {
        let p = Self {
            dim: n.saturating_sub(1),
            geometry: Geometry::RadialAnnulus,
            inner_radius: inner,
            outer_radius: outer,
            sector_half_angle: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Restricts the support to directions within `half_angle` of `-e_1`.
    pub fn with_sector(mut self, half_angle: f64) -> Result<Self> {
        self.sector_half_angle = Some(half_angle);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(invalid("spatial profiles are implemented for n = 2, 3"));
        }
        if !(self.inner_radius > 0.0 && self.outer_radius > self.inner_radius) {
            return Err(invalid("annulus needs 0 < inner < outer"));
        }
        if let Some(h) = self.sector_half_angle {
            if !(h > 0.0 && h < PI) {
                return Err(invalid("sector half-angle must lie in (0, pi)"));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.dim + 1
    }

    fn radial_coord(&self, r: f64) -> f64 {
        (2.0 * r - (self.inner_radius + self.outer_radius))
            / (self.outer_radius - self.inner_radius)
    }

    fn box_coord(&self, y: f64) -> f64 {
        let (lo, hi) = (-self.outer_radius, -self.inner_radius);
        (2.0 * y - (lo + hi)) / (hi - lo)
    }

    fn sector_coord(&self, y: &[f64; 2], r: f64) -> Option<f64> {
        let half = self.sector_half_angle?;
        let c = -y[0] / r;
        Some((1.0 - c) / (1.0 - half.cos()))
    }

    fn components(&self, y: &[f64]) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (o, x) in v.iter_mut().zip(y) {
            *o = *x;
        }
        v
    }

    /// `g_S(y')`; exactly zero outside the support.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let v = self.components(y);
        let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if r <= self.inner_radius || r >= self.outer_radius {
            return 0.0;
        }
        let mut value = bump(self.radial_coord(r));
        if self.geometry == Geometry::BoxAnnulus {
            for &c in &v[..self.dim] {
                value *= bump(self.box_coord(c));
            }
        }
        if let Some(u) = self.sector_coord(&v, r) {
            value *= bump(u);
        }
        value
    }

    /// Analytic gradient of `g_S`.
    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let v = self.components(y);
        let d = self.dim;
        let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if r <= self.inner_radius || r >= self.outer_radius {
            return vec![0.0; d];
        }
        // Each factor as (value, gradient).
        let mut factors: Vec<(f64, [f64; 2])> = Vec::with_capacity(4);
        let rc = self.radial_coord(r);
        let scale = 2.0 / (self.outer_radius - self.inner_radius);
        let dr = bump_prime(rc) * scale;
        factors.push((bump(rc), [dr * v[0] / r, dr * v[1] / r]));
        if self.geometry == Geometry::BoxAnnulus {
            let bscale = 2.0 / (self.outer_radius - self.inner_radius);
            for k in 0..d {
                let u = self.box_coord(v[k]);
                let mut g = [0.0; 2];
                g[k] = bump_prime(u) * bscale;
                factors.push((bump(u), g));
            }
        }
        if let Some(u) = self.sector_coord(&v, r) {
            let half = self.sector_half_angle.expect("sector present");
            let du_dc = -1.0 / (1.0 - half.cos());
            let r3 = r * r * r;
            let dc = [-1.0 / r + v[0] * v[0] / r3, v[0] * v[1] / r3];
            let b = bump_prime(u) * du_dc;
            factors.push((bump(u), [b * dc[0], b * dc[1]]));
        }
        let mut grad = vec![0.0; d];
        for (k, g) in grad.iter_mut().enumerate() {
            for (idx, (_, fg)) in factors.iter().enumerate() {
                let others: f64 = factors
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != idx)
                    .map(|(_, (val, _))| *val)
                    .product();
                *g += fg[k] * others;
            }
        }
        grad
    }

    /// A lower bound for the distance from `x'` to the support.
    pub fn support_distance(&self, x: &[f64]) -> f64 {
        let v = self.components(x);
        let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let radial = if r < self.inner_radius {
            self.inner_radius - r
        } else if r > self.outer_radius {
            r - self.outer_radius
        } else {
            0.0
        };
        let boxed = if self.geometry == Geometry::BoxAnnulus {
            let (lo, hi) = (-self.outer_radius, -self.inner_radius);
            v[..self.dim]
                .iter()
                .map(|&c| {
                    if c > hi {
                        c - hi
                    } else if c < lo {
                        lo - c
                    } else {
                        0.0
                    }
                })
                .map(|e| e * e)
                .sum::<f64>()
                .sqrt()
        } else {
            0.0
        };
        radial.max(boxed)
    }

    /// Quadrature rule for integrals against `g_S`: nodes paired with weight
    /// times profile value. `panels * order` nodes per axis.
    pub fn rule(&self, panels: usize, order: usize) -> SpatialRule {
        let gl = legendre(order);
        let composite = |a: f64, b: f64| -> Vec<(f64, f64)> {
            let h = (b - a) / panels as f64;
            (0..panels)
                .flat_map(|p| {
                    let mid = a + (p as f64 + 0.5) * h;
                    gl.iter()
                        .map(move |&(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
                })
                .collect()
        };
        let mut nodes = Vec::new();
        match (self.geometry, self.dim) {
            (Geometry::BoxAnnulus, 2) => {
                let axis = composite(-self.outer_radius, -self.inner_radius);
                for &(y0, w0) in &axis {
                    for &(y1, w1) in &axis {
                        nodes.push(([y0, y1], w0 * w1));
                    }
                }
            }
            (_, 1) => {
                for (y, w) in composite(-self.outer_radius, -self.inner_radius) {
                    nodes.push(([y, 0.0], w));
                }
                if self.geometry == Geometry::RadialAnnulus {
                    for (y, w) in composite(self.inner_radius, self.outer_radius) {
                        nodes.push(([y, 0.0], w));
                    }
                }
            }
            _ => {
                let radial = composite(self.inner_radius, self.outer_radius);
                let angular: Vec<(f64, f64)> = match self.sector_half_angle {
                    Some(h) => composite(PI - h, PI + h),
                    None => {
                        // Periodic trapezoid rule.
                        let m = 4 * panels * order;
                        (0..m)
                            .map(|k| (2.0 * PI * k as f64 / m as f64, 2.0 * PI / m as f64))
                            .collect()
                    }
                };
                for &(r, wr) in &radial {
                    for &(theta, wt) in &angular {
                        let (s, c) = theta.sin_cos();
                        nodes.push(([r * c, r * s], wr * wt * r));
                    }
                }
            }
        }
        let nodes = nodes
            .into_iter()
            .filter_map(|(y, w)| {
                let g = self.eval(&y);
                (g != 0.0).then_some((y, w * g))
            })
            .collect();
        SpatialRule {
            profile: self.clone(),
            nodes,
        }
    }

    /// `rule` with the resolution used throughout the experiments.
    pub fn default_rule(&self) -> SpatialRule {
        self.rule(16, 12)
    }
}

/// Nodes `y'` with weights already multiplied by `g_S(y')`.
#[derive(Debug, Clone)]
pub struct SpatialRule {
    pub profile: SpatialProfile,
    pub nodes: Vec<([f64; 2], f64)>,
}

impl SpatialRule {
    /// Errors when `x'` is closer than `required` to the support.
    pub fn check_separation(&self, x: &[f64], required: f64) -> Result<()> {
        let distance = self.profile.support_distance(x);
        if distance < required {
            return Err(Error::Separation { distance, required });
        }
        Ok(())
    }

    /// `int g_S(y') dy'`.
    pub fn mass(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}

/// Temporal family selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalKind {
    /// Indicator of the union of `((2k+1)^{-a}, (2k)^{-a})`, `k = 1..=k_max`.
    CharSum { a: f64, k_max: usize },
    /// `sigma^{1-1/q} / ln(1/sigma)` with `sigma = s - 3/4` on `(3/4, 7/8]`,
    /// zero before and constant after.
    PowerLog { q: f64 },
    /// `eta(s) (1-s)^{1/2} / ln(1-s)` for `s < 1`, zero after.
    SqrtLog,
    /// Natural cubic spline through the samples, zero outside their range.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TemporalSpec {
    #[serde(flatten)]
    kind: TemporalKind,
    #[serde(default = "unit")]
    amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

/// Natural cubic spline with precomputed second derivatives.
#[derive(Debug, Clone, PartialEq)]
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(invalid(
                "tabulated profile needs at least two (time, value) pairs",
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated times must be strictly increasing"));
        }
        // Tridiagonal system for interior second derivatives.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let f = lower / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    fn locate(&self, s: f64) -> Option<usize> {
        let n = self.x.len();
        if s < self.x[0] || s > self.x[n - 1] {
            return None;
        }
        let idx = self.x.partition_point(|&v| v <= s);
        Some(idx.clamp(1, n - 1) - 1)
    }

    fn eval(&self, s: f64) -> f64 {
        let Some(i) = self.locate(s) else { return 0.0 };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - s) / h;
        let b = (s - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, s: f64) -> f64 {
        let Some(i) = self.locate(s) else { return 0.0 };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - s) / h;
        let b = (s - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
}

/// `e^{-1/v}` for `v > 0`.
fn smooth_edge(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (-1.0 / v).exp()
    }
}

fn smooth_edge_prime(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        smooth_edge(v) / (v * v)
    }
}

/// Smooth transition from 0 at `v <= 0` to 1 at `v >= 1`, with derivative.
fn transition(v: f64) -> (f64, f64) {
    let (f, g) = (smooth_edge(v), smooth_edge(1.0 - v));
    let s = f + g;
    let value = f / s;
    let deriv = (smooth_edge_prime(v) * g + f * smooth_edge_prime(1.0 - v)) / (s * s);
    (value, deriv)
}

/// Cutoff rising on `(3/4, 7/8)`, equal to 1 on `[7/8, 3/2]`, falling on
/// `(3/2, 2)`.
pub fn cutoff_eta(s: f64) -> (f64, f64) {
    if s <= 0.75 || s >= 2.0 {
        (0.0, 0.0)
    } else if s < 0.875 {
        let (v, d) = transition((s - 0.75) * 8.0);
        (v, 8.0 * d)
    } else if s <= 1.5 {
        (1.0, 0.0)
    } else {
        let (v, d) = transition((2.0 - s) * 2.0);
        (v, -2.0 * d)
    }
}

/// A temporal profile `a_amp g_T(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemporalSpec", into = "TemporalSpec")]
pub struct TemporalProfile {
    kind: TemporalKind,
    amplitude: f64,
    spline: Option<Spline>,
}

impl TryFrom<TemporalSpec> for TemporalProfile {
    type Error = Error;
    fn try_from(spec: TemporalSpec) -> Result<Self> {
        Self::new(spec.kind, spec.amplitude)
    }
}

impl From<TemporalProfile> for TemporalSpec {
    fn from(p: TemporalProfile) -> Self {
        Self {
            kind: p.kind,
            amplitude: p.amplitude,
        }
    }
}

const POWER_LOG_START: f64 = 0.75;
const POWER_LOG_END: f64 = 0.875;

impl TemporalProfile {
    pub fn new(kind: TemporalKind, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid("amplitude must be positive"));
        }
        let spline = match &kind {
            TemporalKind::CharSum { a, k_max } => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(invalid("char_sum needs 0 < a < 1"));
                }
                if *k_max == 0 {
                    return Err(invalid("char_sum needs at least one block"));
                }
                None
            }
            TemporalKind::PowerLog { q } => {
                if !(*q > 1.0) {
                    return Err(invalid("power_log needs q > 1"));
                }
                None
            }
            TemporalKind::SqrtLog => None,
            TemporalKind::Tabulated { times, values } => Some(Spline::new(times, values)?),
        };
        Ok(Self {
            kind,
            amplitude,
            spline,
        })
    }

    pub fn char_sum(a: f64, k_max: usize) -> Result<Self> {
        Self::new(TemporalKind::CharSum { a, k_max }, 1.0)
    }

    pub fn power_log(q: f64) -> Result<Self> {
        Self::new(TemporalKind::PowerLog { q }, 1.0)
    }

    pub fn sqrt_log() -> Self {
        Self::new(TemporalKind::SqrtLog, 1.0).expect("valid parameters")
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(TemporalKind::Tabulated { times, values }, 1.0)
    }

    /// Samples `f` on `count` equispaced points of `[a, b]`.
    pub fn sampled(f: impl Fn(f64) -> f64, a: f64, b: f64, count: usize) -> Result<Self> {
        if count < 2 || !(b > a) {
            return Err(invalid("sampling needs count >= 2 and a < b"));
        }
        let times: Vec<f64> = (0..count)
            .map(|k| a + (b - a) * k as f64 / (count - 1) as f64)
            .collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::tabulated(times, values)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid("amplitude must be positive"));
        }
        self.amplitude = amplitude;
        Ok(self)
    }

    pub fn kind(&self) -> &TemporalKind {
        &self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Blocks `((2k+1)^{-a}, (2k)^{-a})` of a `char_sum` profile, ordered by `k`.
    pub fn blocks(&self) -> Vec<(f64, f64)> {
        match self.kind {
            TemporalKind::CharSum { a, k_max } => (1..=k_max)
                .map(|k| (((2 * k + 1) as f64).powf(-a), ((2 * k) as f64).powf(-a)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// `g_T(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        let raw = match &self.kind {
            TemporalKind::CharSum { .. } => {
                if self.blocks().iter().any(|&(lo, hi)| s > lo && s < hi) {
                    1.0
                } else {
                    0.0
                }
            }
            TemporalKind::PowerLog { q } => {
                let sigma = s.min(POWER_LOG_END) - POWER_LOG_START;
                if sigma <= 0.0 {
                    0.0
                } else {
                    sigma.powf(1.0 - 1.0 / q) / (-sigma.ln())
                }
            }
            TemporalKind::SqrtLog => {
                if s >= 1.0 {
                    0.0
                } else {
                    let u = 1.0 - s;
                    let (eta, _) = cutoff_eta(s);
                    if eta == 0.0 {
                        0.0
                    } else {
                        eta * u.sqrt() / u.ln()
                    }
                }
            }
            TemporalKind::Tabulated { .. } => self.spline.as_ref().expect("built").eval(s),
        };
        self.amplitude * raw
    }

    /// Analytic derivative; a domain error where the profile is not
    /// differentiable.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        let raw = match &self.kind {
            TemporalKind::CharSum { .. } => {
                if self.blocks().iter().any(|&(lo, hi)| s == lo || s == hi) {
                    return Err(domain(format!("char_sum jumps at s = {s}")));
                }
                0.0
            }
            TemporalKind::PowerLog { q } => {
                if s == POWER_LOG_START || s == POWER_LOG_END {
                    return Err(domain(format!(
                        "power_log is not differentiable at s = {s}"
                    )));
                }
                if !(POWER_LOG_START..=POWER_LOG_END).contains(&s) {
                    0.0
                } else {
                    let sigma = s - POWER_LOG_START;
                    let l = -sigma.ln();
                    sigma.powf(-1.0 / q) * ((1.0 - 1.0 / q) / l + 1.0 / (l * l))
                }
            }
            TemporalKind::SqrtLog => {
                if s == 1.0 {
                    return Err(domain("sqrt_log is not differentiable at s = 1"));
                }
                if s > 1.0 {
                    0.0
                } else {
                    let u = 1.0 - s;
                    let (eta, deta) = cutoff_eta(s);
                    let l = u.ln();
                    let base = u.sqrt() / l;
                    let dbase = -0.5 / (u.sqrt() * l) * (1.0 - 2.0 / l);
                    deta * base + eta * dbase
                }
            }
            TemporalKind::Tabulated { .. } => self.spline.as_ref().expect("built").derivative(s),
        };
        Ok(self.amplitude * raw)
    }

    /// Points where the profile or its derivative fails to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.kind {
            TemporalKind::CharSum { .. } => self
                .blocks()
                .into_iter()
                .flat_map(|(lo, hi)| [lo, hi])
                .collect(),
            TemporalKind::PowerLog { .. } => vec![POWER_LOG_START, POWER_LOG_END],
            TemporalKind::SqrtLog => vec![0.75, 0.875, 1.0],
            TemporalKind::Tabulated { times, .. } => vec![times[0], times[times.len() - 1]],
        };
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Bounds of the closed interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            TemporalKind::CharSum { .. } => {
                let b = self.blocks();
                (b.last().expect("k_max >= 1").0, b[0].1)
            }
            TemporalKind::PowerLog { .. } => (POWER_LOG_START, f64::INFINITY),
            TemporalKind::SqrtLog => (0.75, 1.0),
            TemporalKind::Tabulated { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    /// `sup |g_T|`.
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            TemporalKind::CharSum { .. } => self.amplitude,
            TemporalKind::PowerLog { .. } => self.eval(POWER_LOG_END).abs(),
            _ => {
                let (a, b) = self.support();
                let m = 20_000;
                (0..=m)
                    .map(|k| a + (b - a) * k as f64 / m as f64)
                    .chain(self.breakpoints())
                    .map(|s| self.eval(s).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            TemporalKind::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_profile_support_and_peak() {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0).unwrap();
        assert_eq!(g.eval(&[2.0, 0.0]), 0.0);
        assert_eq!(g.eval(&[0.0, 1.5]), 0.0);
        let mid = g.eval(&[0.0, -1.75]);
        assert!(mid > 0.0 && mid <= 1.0);
        assert!((mid - 1.0).abs() < 1e-15);
        let b = SpatialProfile::box_annulus(3).unwrap();
        assert_eq!(b.eval(&[3.5, 3.5]), 0.0);
        assert!(b.eval(&[-4.5, -4.5]) > 0.0);
    }

    #[test]
    fn spatial_gradient_matches_differences() {
        let profiles = [
            SpatialProfile::box_annulus(3).unwrap(),
            SpatialProfile::radial_annulus(3, 1.5, 2.0)
                .unwrap()
                .with_sector(PI / 2.0)
                .unwrap(),
            SpatialProfile::box_annulus(2).unwrap(),
        ];
        let points: [[f64; 2]; 4] = [[-4.4, -4.1], [-1.6, 0.4], [-1.2, -1.1], [-4.2, 0.0]];
        let h = 1e-6;
        for g in &profiles {
            for p in &points {
                let p = &p[..g.dim];
                let grad = g.gradient(p);
                for k in 0..g.dim {
                    let mut a = p.to_vec();
                    let mut b = p.to_vec();
                    a[k] += h;
                    b[k] -= h;
                    let fd = (g.eval(&a) - g.eval(&b)) / (2.0 * h);
                    assert!((fd - grad[k]).abs() < 1e-6, "{g:?} {p:?} {k}");
                }
            }
        }
    }

    #[test]
    fn rule_integrates_profile_mass() {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0).unwrap();
        let coarse = g.default_rule().mass();
        let fine = g.rule(32, 16).mass();
        assert!((coarse - fine).abs() < 1e-8 * fine, "{coarse} {fine}");
    }

    #[test]
    fn char_sum_membership() {
        let g = TemporalProfile::char_sum(0.5, 4).unwrap();
        assert_eq!(g.eval(6f64.powf(-0.5) * (1.0 - 1e-9)), 1.0);
        assert_eq!(g.eval(0.9), 0.0);
        assert!(g.derivative(6f64.powf(-0.5)).is_err());
        assert_eq!(g.derivative(0.3).unwrap(), 0.0);
        assert!(TemporalProfile::char_sum(1.0, 3).is_err());
    }

    #[test]
    fn power_log_shape() {
        let g = TemporalProfile::power_log(2.0).unwrap();
        assert_eq!(g.eval(0.75), 0.0);
        assert!(g.eval(0.75 + 1e-12) < 1e-5);
        assert!(g.derivative(0.875).is_err());
        assert_eq!(g.eval(0.95), g.eval(0.875));
        assert!(TemporalProfile::power_log(1.0).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let profiles = [
            TemporalProfile::power_log(2.0).unwrap(),
            TemporalProfile::power_log(1.5).unwrap(),
            TemporalProfile::sqrt_log(),
            TemporalProfile::sampled(|s| (3.0 * s).sin(), 0.0, 1.0, 41).unwrap(),
        ];
        for g in &profiles {
            for &s in &[0.8, 0.81, 0.86, 0.9, 0.95] {
                let h = 1e-6;
                let fd = (g.eval(s + h) - g.eval(s - h)) / (2.0 * h);
                let exact = g.derivative(s).unwrap();
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{g:?} {s}");
            }
        }
    }

    #[test]
    fn cutoff_plateau_and_support() {
        assert_eq!(cutoff_eta(0.7).0, 0.0);
        assert_eq!(cutoff_eta(1.0).0, 1.0);
        assert_eq!(cutoff_eta(2.1).0, 0.0);
        let (mid, _) = cutoff_eta(0.8125);
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spline_reproduces_cubics() {
        let g = TemporalProfile::sampled(|s| 2.0 * s - 1.0, 0.0, 2.0, 9).unwrap();
        assert!((g.eval(0.37) - (-0.26)).abs() < 1e-13);
        assert!((g.derivative(1.3).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(g.eval(2.5), 0.0);
        let constant = TemporalProfile::tabulated(vec![0.0, 0.5, 1.0], vec![3.0; 3]).unwrap();
        assert_eq!(constant.derivative(0.7).unwrap(), 0.0);
    }

    #[test]
    fn profiles_round_trip_through_toml() {
        let g = TemporalProfile::char_sum(0.5, 16)
            .unwrap()
            .with_amplitude(2.0)
            .unwrap();
        let text = toml::to_string(&g).unwrap();
        let back: TemporalProfile = toml::from_str(&text).unwrap();
        assert_eq!(g, back);
        let bad: std::result::Result<TemporalProfile, _> =
            toml::from_str("kind = \"power_log\"\nq = 0.5\n");
        assert!(bad.is_err());
    }
}
