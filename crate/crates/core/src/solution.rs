//! Pointwise evaluation of the constructed velocity components and of the
//! harmonic flow.
//!
//! The tangential index of the velocity is fixed to 1 throughout.

use serde::{Deserialize, Serialize};

use crate::boundary_data::{SpatialRule, TemporalKind, TemporalProfile};
use crate::error::{domain, invalid, Result};
use crate::kernels::{heat_kernel_1d_deriv, sphere_area, tensor_l, tensor_l_dxn, SpaceTimePoint};
use crate::quadrature::{integrate, integrate_pieces, QuadratureSpec};
use crate::riesz::{profile_psi, riesz_layer, MIN_SEPARATION};

/// Boundary data `g_S(y') g_T(s)` with the spatial factor pre-discretized.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub spatial: SpatialRule,
    pub temporal: TemporalProfile,
}

impl BoundaryData {
    pub fn new(spatial: SpatialRule, temporal: TemporalProfile) -> Self {
        Self { spatial, temporal }
    }

    pub fn n(&self) -> usize {
        self.spatial.profile.n()
    }

    fn check_point(&self, p: &SpaceTimePoint) -> Result<()> {
        p.validate()?;
        if p.n != self.n() {
            return Err(invalid(format!(
                "point has n = {} but the data has n = {}",
                p.n,
                self.n()
            )));
        }
        Ok(())
    }
}

/// Which derivative of a component is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    #[default]
    Value,
    /// `D_{x_n}`.
    Normal,
}

/// Components of the decomposition to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SolutionComponentSelector {
    #[serde(default)]
    pub l: bool,
    #[serde(default)]
    pub b1: bool,
    #[serde(default)]
    pub b2: bool,
    #[serde(default)]
    pub n: bool,
    #[serde(default)]
    pub h: bool,
    #[serde(default)]
    pub derivative: Derivative,
}

impl SolutionComponentSelector {
    pub fn b1_and_n() -> Self {
        Self {
            b1: true,
            n: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l || self.b1 || self.b2 || self.n || self.h) {
            return Err(invalid("select at least one component"));
        }
        if self.b2 {
            return Err(invalid(
                "the remainder part of the boundary-layer component is only bounded, not assembled",
            ));
        }
        Ok(())
    }
}

/// `int_0^t f(t - s) g_T(s) ds` with optional `s = t - tau^2`.
///
/// `scales` are characteristic values of `t - s` where `f` varies fastest.
fn time_convolution<F>(
    mut f: F,
    t: f64,
    g: &TemporalProfile,
    scales: &[f64],
    q: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (s0, s1) = g.support();
    let lo = s0.max(0.0);
    let hi = s1.min(t);
    if hi <= lo {
        return Ok(0.0);
    }
    let jumps: Vec<f64> = g
        .breakpoints()
        .into_iter()
        .filter(|s| *s > lo && *s < hi)
        .collect();
    if q.singular_substitution {
        let (u_lo, u_hi) = ((t - hi).sqrt(), (t - lo).sqrt());
        let mut pts = vec![u_lo, u_hi];
        pts.extend(jumps.iter().map(|s| (t - s).sqrt()));
        pts.extend(scales.iter().map(|tau| tau.sqrt()));
        pts.sort_by(f64::total_cmp);
        let pts: Vec<f64> = pts
            .into_iter()
            .filter(|u| *u >= u_lo && *u <= u_hi)
            .collect();
        integrate_pieces(
            |u| {
                let tau = u * u;
                let gv = g.eval(t - tau);
                if gv == 0.0 {
                    return Ok(0.0);
                }
                Ok(2.0 * u * f(tau)? * gv)
            },
            &pts,
            q,
        )
        .map(|e| e.value)
    } else {
        let mut pts = vec![lo, hi];
        pts.extend(jumps);
        pts.extend(scales.iter().map(|tau| t - tau));
        pts.sort_by(f64::total_cmp);
        let pts: Vec<f64> = pts.into_iter().filter(|s| *s >= lo && *s <= hi).collect();
        integrate_pieces(
            |s| {
                let gv = g.eval(s);
                if gv == 0.0 {
                    return Ok(0.0);
                }
                Ok(f(t - s)? * gv)
            },
            &pts,
            q,
        )
        .map(|e| e.value)
    }
}

/// `int_0^t D^k Gamma_1(x_n, t - s) g_T(s) ds`.
///
/// For `char_sum` data and `k >= 1` each block contributes a difference of
/// time antiderivatives of `D^k Gamma_1`, which are available in closed form.
/// Everything else goes through [`caloric_layer_adaptive`].
pub fn caloric_layer(
    k: usize,
    x_normal: f64,
    t: f64,
    g: &TemporalProfile,
    q: &QuadratureSpec,
) -> Result<f64> {
    if k >= 1 && matches!(g.kind(), TemporalKind::CharSum { .. }) {
        check_layer_args(k, x_normal, t)?;
        if x_normal == 0.0 {
            return caloric_layer_adaptive(k, x_normal, t, g, q);
        }
        let anti = |tau: f64| -> Result<f64> {
            if tau <= 0.0 {
                return Ok(0.0);
            }
            match k {
                1 => Ok(-0.5 * libm::erfc(x_normal / (2.0 * tau.sqrt()))),
                _ => heat_kernel_1d_deriv(k - 2, x_normal, tau),
            }
        };
        let mut total = 0.0;
        for (lo, hi) in g.blocks() {
            if lo >= t {
                continue;
            }
            total += anti(t - lo)? - anti(t - hi)?;
        }
        return Ok(g.amplitude() * total);
    }
    caloric_layer_adaptive(k, x_normal, t, g, q)
}

fn check_layer_args(k: usize, x_normal: f64, t: f64) -> Result<()> {
    if k > 3 {
        return Err(invalid(format!("derivative order {k} outside 0..=3")));
    }
    if !(t > 0.0) {
        return Err(domain("caloric layer needs t > 0"));
    }
    if !(x_normal >= 0.0) {
        return Err(domain("caloric layer needs x_n >= 0"));
    }
    Ok(())
}

/// [`caloric_layer`] by adaptive quadrature of the time convolution, for any
/// profile.
pub fn caloric_layer_adaptive(
    k: usize,
    x_normal: f64,
    t: f64,
    g: &TemporalProfile,
    q: &QuadratureSpec,
) -> Result<f64> {
    q.validate()?;
    check_layer_args(k, x_normal, t)?;
    if g.is_zero() {
        return Ok(0.0);
    }
    if x_normal == 0.0 {
        if k % 2 == 1 {
            return Ok(0.0);
        }
        if k >= 2 {
            return Err(domain(
                "even derivatives of the layer diverge on the boundary",
            ));
        }
    }
    let x2 = x_normal * x_normal;
    let scales: Vec<f64> = [1.0 / 16.0, 0.25, 1.0, 4.0]
        .iter()
        .map(|c| c * x2)
        .collect();
    time_convolution(
        |tau| heat_kernel_1d_deriv(k, x_normal, tau),
        t,
        g,
        &scales,
        q,
    )
}

/// Limit of `caloric_layer(1, x_n, t, 1)` as `x_n -> 0`, measured by
/// evaluating at a small `x_n` with a unit profile.
pub fn measure_trace_constant(q: &QuadratureSpec) -> Result<f64> {
    let unit = TemporalProfile::tabulated(vec![0.0, 1.0], vec![1.0, 1.0])?;
    let (t, x) = (0.5, 1e-7);
    caloric_layer(1, x, t, &unit, q)
}

fn tangential_psi(p: &SpaceTimePoint, data: &BoundaryData) -> Result<f64> {
    profile_psi(&p.x_tangential, &data.spatial)
}

/// `caloric_layer(1) * psi(x')`.
pub fn w_b1(p: &SpaceTimePoint, data: &BoundaryData, q: &QuadratureSpec) -> Result<f64> {
    data.check_point(p)?;
    let psi = tangential_psi(p, data)?;
    if psi == 0.0 {
        return Ok(0.0);
    }
    Ok(caloric_layer(1, p.x_normal, p.t, &data.temporal, q)? * psi)
}

/// `caloric_layer(2) * psi(x')`.
pub fn dxn_w_b1(p: &SpaceTimePoint, data: &BoundaryData, q: &QuadratureSpec) -> Result<f64> {
    data.check_point(p)?;
    let psi = tangential_psi(p, data)?;
    if psi == 0.0 {
        return Ok(0.0);
    }
    Ok(caloric_layer(2, p.x_normal, p.t, &data.temporal, q)? * psi)
}

/// `-2 int D_1 N(x' - y', x_n) g(y', t) dy'` together with its gradient in
/// `(x', x_n)`.
pub fn w_n_with_gradient(p: &SpaceTimePoint, data: &BoundaryData) -> Result<(f64, Vec<f64>)> {
    data.check_point(p)?;
    let gt = data.temporal.eval(p.t);
    if gt == 0.0 {
        return Ok((0.0, vec![0.0; p.n]));
    }
    let (value, grad) = riesz_layer(&p.x_tangential, p.x_normal, &data.spatial)?;
    let c = -2.0 * gt / sphere_area(p.n);
    Ok((c * value, grad.into_iter().map(|g| c * g).collect()))
}

pub fn w_n(p: &SpaceTimePoint, data: &BoundaryData) -> Result<f64> {
    Ok(w_n_with_gradient(p, data)?.0)
}

/// `int_0^t int L_{ni}(x' - y', x_n, t - s) g(y', s) dy' ds`.
///
/// Uses `L_{ni}(X) = (X_i / |X|) F(|X|)` for tangential `i` (and no angular
/// factor for `i = n`), so the spatial integral becomes a radial integral of
/// `F` against angular moments of `g_S`. Expensive: meant for spot checks.
pub fn w_l(i: usize, p: &SpaceTimePoint, data: &BoundaryData, q: &QuadratureSpec) -> Result<f64> {
    w_l_impl(i, p, data, q, false)
}

/// `D_{x_n}` of [`w_l`] for tangential `i`.
pub fn dxn_w_l(
    i: usize,
    p: &SpaceTimePoint,
    data: &BoundaryData,
    q: &QuadratureSpec,
) -> Result<f64> {
    if i == p.n {
        return Err(invalid(
            "normal derivative of w_L is implemented for tangential i",
        ));
    }
    w_l_impl(i, p, data, q, true)
}

fn w_l_impl(
    i: usize,
    p: &SpaceTimePoint,
    data: &BoundaryData,
    q: &QuadratureSpec,
    normal_derivative: bool,
) -> Result<f64> {
    data.check_point(p)?;
    let n = p.n;
    let d = n - 1;
    if !(1..=n).contains(&i) {
        return Err(invalid(format!("component {i} outside 1..={n}")));
    }
    if !(p.t > 0.0 && p.x_normal > 0.0) {
        return Err(domain("w_L needs t > 0 and x_n > 0"));
    }
    if data.temporal.is_zero() {
        return Ok(0.0);
    }
    let profile = &data.spatial.profile;
    let rho_min = profile.support_distance(&p.x_tangential);
    if rho_min < MIN_SEPARATION {
        return Err(crate::Error::Separation {
            distance: rho_min,
            required: MIN_SEPARATION,
        });
    }
    let xt = p.tangential2();
    let rho_max = (xt[0] * xt[0] + xt[1] * xt[1]).sqrt() + profile.outer_radius;
    // Angular factor of the i-th component for direction theta.
    let weight = move |c: f64, s: f64| -> f64 {
        match (i == n, i) {
            (true, _) => 1.0,
            (false, 1) => c,
            _ => s,
        }
    };
    let moment = |rho: f64| -> Result<f64> {
        if d == 1 {
            let mut total = 0.0;
            for sign in [1.0, -1.0] {
                total += weight(sign, 0.0) * profile.eval(&[xt[0] - sign * rho]);
            }
            return Ok(total);
        }
        Ok(integrate(
            |theta| {
                let (s, c) = theta.sin_cos();
                Ok(weight(c, s) * profile.eval(&[xt[0] - rho * c, xt[1] - rho * s]))
            },
            -std::f64::consts::PI,
            std::f64::consts::PI,
            q,
        )?
        .value)
    };
    let column = if i == n { n } else { 1 };
    let inner_q = q.scaled(0.1);
    let radial = |rho: f64| -> Result<f64> {
        let a = moment(rho)?;
        if a == 0.0 {
            return Ok(0.0);
        }
        let mut xt_rho = vec![0.0; d];
        xt_rho[0] = rho;
        let f = |tau: f64| -> Result<f64> {
            let point = SpaceTimePoint::new(xt_rho.clone(), p.x_normal, tau)?;
            if normal_derivative {
                tensor_l_dxn(n, column, &point, &inner_q)
            } else {
                tensor_l(n, column, &point, &inner_q)
            }
        };
        let time = time_convolution(f, p.t, &data.temporal, &[], &inner_q)?;
        Ok(rho.powi(d as i32 - 1) * a * time)
    };
    let mut pts = vec![rho_min, rho_max];
    pts.push(rho_min + profile.inner_radius.min(rho_max - rho_min) * 0.5);
    pts.sort_by(f64::total_cmp);
    Ok(integrate_pieces(radial, &pts, q)?.value)
}

/// Harmonic potential, flow and pressure at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFlow {
    pub phi: f64,
    pub w_h: Vec<f64>,
    pub p_h: f64,
}

/// Spatial factor `Phi_S(x) = int k(x - y') g_S(y') dy'` with
/// `k = |.|^{2-n}` for `n >= 3` and `-ln|.|` for `n = 2`, and its gradient.
pub fn harmonic_spatial(
    x_tangential: &[f64],
    x_normal: f64,
    rule: &SpatialRule,
) -> Result<(f64, Vec<f64>)> {
    let d = rule.profile.dim;
    if x_tangential.len() != d {
        return Err(invalid(format!("expected {d} tangential coordinates")));
    }
    rule.check_separation(x_tangential, MIN_SEPARATION)?;
    let n = d + 1;
    let mut xv = [0.0; 2];
    xv[..d].copy_from_slice(x_tangential);
    let h2 = x_normal * x_normal;
    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    for &(y, w) in &rule.nodes {
        let v = [xv[0] - y[0], xv[1] - y[1]];
        let r2 = v[0] * v[0] + v[1] * v[1] + h2;
        // Both kernels have gradient (2 - n) |v|^{-n} v up to the n = 2 sign.
        let (k, dk) = if n == 2 {
            (-0.5 * r2.ln(), -1.0 / r2)
        } else {
            let r = r2.sqrt();
            let p = r.powi(2 - n as i32);
            (p, (2.0 - n as f64) * p / r2)
        };
        value += w * k;
        for (c, g) in grad.iter_mut().enumerate().take(d) {
            *g += w * dk * v[c];
        }
        grad[d] += w * dk * x_normal;
    }
    Ok((value, grad))
}

/// `phi = g_T(t) Phi_S(x)`, `w_H = grad phi`, `p_H = -D_t phi`.
pub fn harmonic_flow(p: &SpaceTimePoint, data: &BoundaryData) -> Result<HarmonicFlow> {
    data.check_point(p)?;
    let (spatial, grad) = harmonic_spatial(&p.x_tangential, p.x_normal, &data.spatial)?;
    let gt = data.temporal.eval(p.t);
    let dgt = data.temporal.derivative(p.t)?;
    Ok(HarmonicFlow {
        phi: gt * spatial,
        w_h: grad.into_iter().map(|g| gt * g).collect(),
        p_h: -dgt * spatial,
    })
}

/// Sum of the selected components of `w_1` (or of their normal derivative).
pub fn evaluate(
    sel: &SolutionComponentSelector,
    p: &SpaceTimePoint,
    data: &BoundaryData,
    q: &QuadratureSpec,
) -> Result<f64> {
    sel.validate()?;
    let normal = sel.derivative == Derivative::Normal;
    let mut total = 0.0;
    if sel.b1 {
        total += if normal {
            dxn_w_b1(p, data, q)?
        } else {
            w_b1(p, data, q)?
        };
    }
    if sel.n {
        let (v, g) = w_n_with_gradient(p, data)?;
        total += if normal { g[p.n - 1] } else { v };
    }
    if sel.l {
        total += if normal {
            dxn_w_l(1, p, data, q)?
        } else {
            w_l(1, p, data, q)?
        };
    }
    if sel.h {
        total += if normal {
            harmonic_mixed(p, data)?
        } else {
            let (_, grad) = harmonic_spatial(&p.x_tangential, p.x_normal, &data.spatial)?;
            data.temporal.eval(p.t) * grad[0]
        };
    }
    Ok(total)
}

/// `D_{x_n} D_{x_1} phi`.
fn harmonic_mixed(p: &SpaceTimePoint, data: &BoundaryData) -> Result<f64> {
    let d = p.n - 1;
    let xt = p.tangential2();
    let gt = data.temporal.eval(p.t);
    let n = p.n as f64;
    let mut total = 0.0;
    for &(y, w) in &data.spatial.nodes {
        let v = [xt[0] - y[0], xt[1] - y[1]];
        let r2 = v[0] * v[0] + v[1] * v[1] + p.x_normal * p.x_normal;
        // D_n D_1 of |v|^{2-n} is (2-n)(-n) v_1 v_n |v|^{-n-2}; for n = 2 the
        // log kernel gives 2 v_1 v_n |v|^{-4}.
        let k = if d == 1 {
            2.0 * v[0] * p.x_normal / (r2 * r2)
        } else {
            (2.0 - n) * (-n) * v[0] * p.x_normal * r2.powf(-0.5 * n - 1.0)
        };
        total += w * k;
    }
    Ok(gt * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::SpatialProfile;
    use std::f64::consts::PI;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn shell_data(temporal: TemporalProfile) -> BoundaryData {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0)
            .unwrap()
            .with_sector(PI / 2.0)
            .unwrap();
        BoundaryData::new(g.default_rule(), temporal)
    }

    #[test]
    fn zero_profile_gives_zero_layer() {
        let g = TemporalProfile::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(caloric_layer(1, 0.1, 0.5, &g, &q()).unwrap(), 0.0);
    }

    #[test]
    fn char_sum_layer_matches_closed_form() {
        // D^2 Gamma_1 integrated over a block is a difference of heat kernels.
        let g = TemporalProfile::char_sum(0.5, 3).unwrap();
        for &(x, t) in &[(0.05, 0.6), (0.2, 0.9), (0.01, 0.65)] {
            let numeric = caloric_layer_adaptive(2, x, t, &g, &q()).unwrap();
            let exact: f64 = g
                .blocks()
                .iter()
                .map(|&(lo, hi)| {
                    let h = |tau: f64| {
                        if tau > 0.0 {
                            heat_kernel_1d_deriv(0, x, tau).unwrap()
                        } else {
                            0.0
                        }
                    };
                    h(t - lo) - h(t - hi)
                })
                .sum();
            assert!(
                (numeric - exact).abs() < 1e-7 * (1.0 + exact.abs()),
                "{numeric} {exact}"
            );
        }
    }

    #[test]
    fn exact_char_sum_path_matches_quadrature() {
        let g = TemporalProfile::char_sum(0.4, 5)
            .unwrap()
            .with_amplitude(2.0)
            .unwrap();
        for k in 1..=3 {
            for &(x, t) in &[(0.03, 0.62), (0.3, 1.0), (0.01, 0.5)] {
                let exact = caloric_layer(k, x, t, &g, &q()).unwrap();
                let numeric = caloric_layer_adaptive(k, x, t, &g, &q()).unwrap();
                assert!(
                    (exact - numeric).abs() < 1e-7 * (1.0 + exact.abs()),
                    "k={k} {exact} {numeric}"
                );
            }
        }
        assert_eq!(caloric_layer(1, 0.0, 0.7, &g, &q()).unwrap(), 0.0);
        assert!(caloric_layer(2, 0.0, 0.7, &g, &q()).is_err());
    }

    #[test]
    fn substitution_agrees_with_plain_integral() {
        let g = TemporalProfile::sampled(|s| (4.0 * s).sin().powi(2), 0.0, 1.0, 81).unwrap();
        let plain = q().with_substitution(false);
        for k in 1..=2 {
            let a = caloric_layer(k, 0.1, 0.8, &g, &q()).unwrap();
            let b = caloric_layer(k, 0.1, 0.8, &g, &plain).unwrap();
            assert!((a - b).abs() < 1e-7 * (1.0 + a.abs()), "{a} {b}");
        }
    }

    #[test]
    fn trace_constant_is_minus_one_half() {
        let kappa = measure_trace_constant(&q()).unwrap();
        assert!((kappa + 0.5).abs() < 1e-5, "{kappa}");
    }

    #[test]
    fn b1_vanishes_where_psi_vanishes() {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0).unwrap();
        let data = BoundaryData::new(g.default_rule(), TemporalProfile::char_sum(0.5, 4).unwrap());
        let p = SpaceTimePoint::new(vec![0.0, 0.4], 0.1, 0.7).unwrap();
        assert!(w_b1(&p, &data, &q()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn n_component_gradient_matches_differences() {
        let data = shell_data(TemporalProfile::sqrt_log());
        let at = |x: [f64; 3]| SpaceTimePoint::new(vec![x[0], x[1]], x[2], 0.9).unwrap();
        let x = [0.3, -0.2, 0.4];
        let (_, grad) = w_n_with_gradient(&at(x), &data).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            let fd = (w_n(&at(a), &data).unwrap() - w_n(&at(b), &data).unwrap()) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-6, "{k}: {fd} {}", grad[k]);
        }
        let off = SpaceTimePoint::new(vec![0.3, -0.2], 0.4, 0.5).unwrap();
        assert_eq!(w_n(&off, &data).unwrap(), 0.0);
    }

    #[test]
    fn harmonic_potential_is_harmonic() {
        let data = shell_data(TemporalProfile::sqrt_log());
        let x = [0.2, 0.1, 0.3];
        let f = |x: [f64; 3]| harmonic_spatial(&x[..2], x[2], &data.spatial).unwrap().0;
        let h = 1e-3;
        let mut lap = 0.0;
        for k in 0..3 {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            lap += (f(a) - 2.0 * f(x) + f(b)) / (h * h);
        }
        assert!(lap.abs() < 1e-5, "{lap}");
    }

    #[test]
    fn constant_in_time_flow_has_no_pressure() {
        let g = TemporalProfile::tabulated(vec![0.0, 2.0], vec![1.5, 1.5]).unwrap();
        let data = shell_data(g);
        let p = SpaceTimePoint::new(vec![0.1, 0.2], 0.3, 0.9).unwrap();
        let flow = harmonic_flow(&p, &data).unwrap();
        assert_eq!(flow.p_h, 0.0);
        assert!(flow.phi > 0.0);
    }

    #[test]
    fn selector_rules() {
        assert!(SolutionComponentSelector::default().validate().is_err());
        let b2 = SolutionComponentSelector {
            b2: true,
            ..Default::default()
        };
        assert!(b2.validate().is_err());
        assert!(SolutionComponentSelector::b1_and_n().validate().is_ok());
    }
}
