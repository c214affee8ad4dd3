//! Gaussian-weighted Riesz integrals and the stationary profile `psi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary_data::SpatialRule;
use crate::error::{invalid, Result};
use crate::kernels::GAUSS_WINDOW;
use crate::quadrature::{PolarRegion, QuadratureSpec};

/// Minimum distance between the evaluation point and the data support for
/// the fixed product rules to be trusted.
pub const MIN_SEPARATION: f64 = 0.25;

/// `total = leading + remainder`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszSplit {
    pub total: f64,
    pub leading: f64,
    pub remainder: f64,
    /// Whether `1 <= |X'| <= 5`, where the remainder bound applies.
    pub in_bound_domain: bool,
}

/// `int exp(-|X'-z'|^2/4t) z_1 / |z'|^n dz'`, `n = X'.len() + 1`.
pub fn gauss_riesz(x: &[f64], t: f64, q: &QuadratureSpec) -> Result<RieszSplit> {
    gauss_riesz_component(1, x, t, q)
}

/// As [`gauss_riesz`] with `z_i` in place of `z_1` (1-based `i`).
///
/// The plane is split into a ball about the origin where the Gaussian's
/// value at the origin is subtracted (its contribution vanishes by
/// oddness), a ball about `X'`, and the remaining Gaussian window.
pub fn gauss_riesz_component(
    i: usize,
    x: &[f64],
    t: f64,
    q: &QuadratureSpec,
) -> Result<RieszSplit> {
    let d = x.len();
    if d != 1 && d != 2 {
        return Err(invalid("Riesz integrals are implemented for n = 2, 3"));
    }
    if !(1..=d).contains(&i) {
        return Err(invalid(format!("component {i} outside 1..={d}")));
    }
    if !(t > 0.0) {
        return Err(invalid("Riesz integrals need t > 0"));
    }
    let i = i - 1;
    let n = (d + 1) as f64;
    let mut xv = [0.0; 2];
    xv[..d].copy_from_slice(x);
    let big_r = (xv[0] * xv[0] + xv[1] * xv[1]).sqrt();
    let in_bound_domain = (1.0..=5.0).contains(&big_r);
    if big_r == 0.0 {
        return Ok(RieszSplit {
            total: 0.0,
            leading: 0.0,
            remainder: 0.0,
            in_bound_domain,
        });
    }
    let four_t = 4.0 * t;
    let kernel = move |z: [f64; 2]| {
        let r2 = z[0] * z[0] + z[1] * z[1];
        z[i] / r2.powf(0.5 * n)
    };
    let gauss = move |z: [f64; 2]| {
        let (a, b) = (xv[0] - z[0], xv[1] - z[1]);
        (-(a * a + b * b) / four_t).exp()
    };
    let small = 0.1 * big_r;
    let window = GAUSS_WINDOW * t.sqrt();
    let inner_q = q.scaled(0.1);

    // Near the origin: e(z) - e(0) = e(0) * expm1((2 X.z - |z|^2) / 4t).
    let e0 = (-big_r * big_r / four_t).exp();
    let d2 = if e0 > 0.0 {
        PolarRegion::annulus(d, [0.0, 0.0], 0.0, small)
            .integrate(
                |z| {
                    let arg = (2.0 * (xv[0] * z[0] + xv[1] * z[1]) - (z[0] * z[0] + z[1] * z[1]))
                        / four_t;
                    Ok(e0 * arg.exp_m1() * kernel(z))
                },
                &inner_q,
            )?
            .value
    } else {
        0.0
    };
    let d1 = PolarRegion::annulus(d, xv, 0.0, small.min(window))
        .with_breaks((1..=4).map(|k| k as f64 * t.sqrt()))
        .integrate(|z| Ok(gauss(z) * kernel(z)), &inner_q)?
        .value;
    let d3 = if window > small {
        PolarRegion::annulus(d, xv, small, window)
            .excluding([0.0, 0.0], small)
            .with_breaks((1..=4).map(|k| k as f64 * t.sqrt()))
            .integrate(|z| Ok(gauss(z) * kernel(z)), &inner_q)?
            .value
    } else {
        0.0
    };
    let total = d1 + d2 + d3;
    let leading = (PI * four_t).powf(0.5 * d as f64) * xv[i] / big_r.powf(n);
    Ok(RieszSplit {
        total,
        leading,
        remainder: total - leading,
        in_bound_domain,
    })
}

/// `psi(x') = int (x_1 - y_1) / |x' - y'|^n g_S(y') dy'`.
pub fn profile_psi(x: &[f64], rule: &SpatialRule) -> Result<f64> {
    Ok(psi_with_gradient(x, rule)?.0)
}

/// `psi(x')` together with its tangential gradient, differentiating the
/// kernel analytically.
pub fn psi_with_gradient(x: &[f64], rule: &SpatialRule) -> Result<(f64, [f64; 2])> {
    let (value, grad) = riesz_layer(x, 0.0, rule)?;
    let mut g = [0.0; 2];
    g[..x.len()].copy_from_slice(&grad[..x.len()]);
    Ok((value, g))
}

/// `int (x_1 - y_1) / |x - y'|^n g_S(y') dy'` at `x = (x', x_n)`, with its
/// gradient in all `n` coordinates. Reduces to `psi` on the boundary.
pub fn riesz_layer(x: &[f64], x_normal: f64, rule: &SpatialRule) -> Result<(f64, Vec<f64>)> {
    let d = rule.profile.dim;
    if x.len() != d {
        return Err(invalid(format!("expected {d} tangential coordinates")));
    }
    rule.check_separation(x, MIN_SEPARATION)?;
    let n = (d + 1) as f64;
    let mut xv = [0.0; 2];
    xv[..d].copy_from_slice(x);
    let h2 = x_normal * x_normal;
    let mut value = 0.0;
    let mut grad = vec![0.0; d + 1];
    for &(y, w) in &rule.nodes {
        let v = [xv[0] - y[0], xv[1] - y[1]];
        let r2 = v[0] * v[0] + v[1] * v[1] + h2;
        let inv = r2.powf(-0.5 * n);
        let lead = w * v[0] * inv;
        value += lead;
        // D_k (v_1 |v|^{-n}) = delta_{k1} |v|^{-n} - n v_1 v_k |v|^{-n-2}
        let common = n * lead / r2;
        grad[0] += w * inv;
        for (k, g) in grad.iter_mut().enumerate().take(d) {
            *g -= common * v[k];
        }
        grad[d] -= common * x_normal;
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::SpatialProfile;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn vanishes_when_first_coordinate_is_zero() {
        let s = gauss_riesz(&[0.0, 1.5], 0.3, &q()).unwrap();
        assert!(s.total.abs() < 1e-12, "{}", s.total);
    }

    #[test]
    fn leading_term_dominates_for_small_time() {
        let s = gauss_riesz(&[2.0, 0.0], 1e-4, &q()).unwrap();
        assert!((s.total / s.leading - 1.0).abs() < 0.05);
        assert_eq!(s.total, s.leading + s.remainder);
        assert!(s.in_bound_domain);
    }

    #[test]
    fn odd_in_first_coordinate() {
        for &t in &[0.01, 0.3, 1.0] {
            let a = gauss_riesz(&[1.3, 0.4], t, &q()).unwrap().total;
            let b = gauss_riesz(&[-1.3, 0.4], t, &q()).unwrap().total;
            assert!((a + b).abs() < 1e-10 * (1.0 + a.abs()), "{a} {b}");
        }
    }

    #[test]
    fn one_dimensional_principal_value() {
        // Folding z -> -z turns the principal value into a regular integral.
        let (x, t) = (1.2, 0.2);
        let s = gauss_riesz(&[x], t, &q()).unwrap();
        let oracle = crate::quadrature::integrate(
            |z| {
                let e = |v: f64| (-(x - v) * (x - v) / (4.0 * t)).exp();
                Ok((e(z) - e(-z)) / z)
            },
            0.0,
            x + 40.0 * t.sqrt(),
            &q(),
        )
        .unwrap()
        .value;
        assert!((s.total - oracle).abs() < 1e-9, "{} {oracle}", s.total);
    }

    #[test]
    fn psi_vanishes_for_centered_annulus_on_axis() {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0).unwrap();
        let rule = g.default_rule();
        let v = profile_psi(&[0.0, 0.3], &rule).unwrap();
        assert!(v.abs() < 1e-10);
        assert!(profile_psi(&[1.4, 0.0], &rule).is_err());
    }

    #[test]
    fn psi_gradient_matches_differences() {
        let g = SpatialProfile::radial_annulus(3, 1.5, 2.0)
            .unwrap()
            .with_sector(PI / 2.0)
            .unwrap();
        let rule = g.default_rule();
        let x = [0.3, -0.2];
        let (_, grad) = psi_with_gradient(&x, &rule).unwrap();
        let h = 1e-5;
        for k in 0..2 {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            let fd =
                (profile_psi(&a, &rule).unwrap() - profile_psi(&b, &rule).unwrap()) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-6, "{fd} {}", grad[k]);
        }
    }
}
