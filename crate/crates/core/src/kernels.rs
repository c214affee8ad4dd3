//! Fundamental solutions of the Laplace and heat equations and the
//! composite half-space tensors built from them.
//!
//! Tensor entries are evaluated by nested adaptive quadrature. Different
//! entries deliberately go through different regularizations of the
//! singular Newtonian kernels, so the algebraic relations between them are
//! genuine numerical checks rather than identities of the code.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::quadrature::{hermite, integrate_pieces, PolarRegion, QuadratureSpec};

/// Radius, in units of `sqrt(t)`, beyond which a heat kernel is below
/// `exp(-40)` of its peak.
pub(crate) const GAUSS_WINDOW: f64 = 12.649_110_640_673_518;

/// A point `(x', x_n, t)` of the half-space-time domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x_tangential: Vec<f64>,
    pub x_normal: f64,
    pub t: f64,
    pub n: usize,
}

impl SpaceTimePoint {
    /// The dimension is one more than the length of `x_tangential`.
    pub fn new(x_tangential: Vec<f64>, x_normal: f64, t: f64) -> Result<Self> {
        let n = x_tangential.len() + 1;
        let p = Self {
            x_tangential,
            x_normal,
            t,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("dimension must be at least 2"));
        }
        if self.x_tangential.len() != self.n - 1 {
            return Err(invalid(format!(
                "tangential part has length {} but n = {}",
                self.x_tangential.len(),
                self.n
            )));
        }
        if !(self.x_normal >= 0.0) {
            return Err(invalid("x_normal must be non-negative"));
        }
        if self.x_tangential.iter().any(|v| !v.is_finite()) || !self.t.is_finite() {
            return Err(invalid("coordinates must be finite"));
        }
        Ok(())
    }

    /// The full spatial point `(x', x_n)`.
    pub fn spatial(&self) -> Vec<f64> {
        let mut x = self.x_tangential.clone();
        x.push(self.x_normal);
        x
    }

    pub fn tangential_norm_sq(&self) -> f64 {
        self.x_tangential.iter().map(|v| v * v).sum()
    }

    /// Tangential part padded to two components.
    pub(crate) fn tangential2(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, v) in out.iter_mut().zip(&self.x_tangential) {
            *o = *v;
        }
        out
    }
}

/// Surface measure of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// `(4 pi t)^{-d/2} exp(-r2 / 4t)` for `t > 0`, zero otherwise.
pub(crate) fn gaussian(d: usize, r2: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (4.0 * PI * t).powf(-0.5 * d as f64) * (-r2 / (4.0 * t)).exp()
}

/// The heat kernel of `R^n`, vanishing for `t <= 0`.
pub fn heat_kernel(p: &SpaceTimePoint) -> f64 {
    let r2 = p.tangential_norm_sq() + p.x_normal * p.x_normal;
    gaussian(p.n, r2, p.t)
}

/// `D^k` of the one-dimensional heat kernel at `(x, t)`, `k <= 3`.
pub fn heat_kernel_1d_deriv(k: usize, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!(
            "one-dimensional heat kernel needs t > 0, got {t}"
        )));
    }
    let g = gaussian(1, x * x, t);
    let factor = match k {
        0 => 1.0,
        1 => -x / (2.0 * t),
        2 => x * x / (4.0 * t * t) - 1.0 / (2.0 * t),
        3 => -x.powi(3) / (8.0 * t.powi(3)) + 3.0 * x / (4.0 * t * t),
        _ => return Err(invalid(format!("derivative order {k} outside 0..=3"))),
    };
    Ok(factor * g)
}

fn nonzero_norm(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(invalid("Newtonian potential needs n >= 2"));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(domain("Newtonian potential is singular at the origin"));
    }
    Ok(r)
}

/// Fundamental solution of the Laplacian in `R^n`, `n = x.len()`.
pub fn newtonian(x: &[f64]) -> Result<f64> {
    let r = nonzero_norm(x)?;
    let n = x.len();
    Ok(if n == 2 {
        r.ln() / (2.0 * PI)
    } else {
        -r.powi(2 - n as i32) / ((n - 2) as f64 * sphere_area(n))
    })
}

/// `grad N(x) = x / (omega_n |x|^n)`.
pub fn newtonian_gradient(x: &[f64]) -> Result<Vec<f64>> {
    let r = nonzero_norm(x)?;
    let n = x.len();
    let c = 1.0 / (sphere_area(n) * r.powi(n as i32));
    Ok(x.iter().map(|v| c * v).collect())
}

/// Hessian of `N`, row-major `n x n`.
pub fn newtonian_hessian(x: &[f64]) -> Result<Vec<f64>> {
    let r = nonzero_norm(x)?;
    let n = x.len();
    let r2 = r * r;
    let c = 1.0 / (sphere_area(n) * r.powi(n as i32 + 2));
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { r2 } else { 0.0 };
            h[i * n + j] = c * (delta - n as f64 * x[i] * x[j]);
        }
    }
    Ok(h)
}

/// `(Gamma(., t) * Gamma(., s))(x)` by a tensor Gauss–Hermite rule of the
/// given order per axis. The wider of the two kernels is used as the weight.
pub fn heat_convolution(x: &[f64], t: f64, s: f64, order: usize) -> Result<f64> {
    if !(t > 0.0 && s > 0.0) {
        return Err(domain("heat convolution needs positive times"));
    }
    let dim = x.len();
    if dim == 0 || dim > 3 {
        return Err(invalid("heat convolution supports dimensions 1..=3"));
    }
    let (wide, narrow) = if s >= t { (s, t) } else { (t, s) };
    let rule = hermite(order);
    let scale = (4.0 * wide).sqrt();
    let norm = PI.powf(-0.5 * dim as f64);
    let m = rule.len();
    let mut total = 0.0;
    let mut idx = vec![0usize; dim];
    loop {
        let mut w = norm;
        let mut r2 = 0.0;
        for (axis, &k) in idx.iter().enumerate() {
            let (u, wk) = rule[k];
            w *= wk;
            let d = x[axis] - scale * u;
            r2 += d * d;
        }
        total += w * gaussian(dim, r2, narrow);
        let mut axis = 0;
        loop {
            if axis == dim {
                return Ok(total);
            }
            idx[axis] += 1;
            if idx[axis] < m {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Checks shared by the tensor entry points; returns `d = n - 1`.
fn tensor_point(p: &SpaceTimePoint) -> Result<usize> {
    p.validate()?;
    if p.n != 2 && p.n != 3 {
        return Err(invalid(format!(
            "tensors are implemented for n = 2, 3; got {}",
            p.n
        )));
    }
    if !(p.t > 0.0) {
        return Err(domain("tensors need t > 0"));
    }
    if !(p.x_normal > 0.0) {
        return Err(domain("tensors need x_n > 0"));
    }
    Ok(p.n - 1)
}

/// Tangential heat kernel `g(v) = Gamma_d(v, t)` and its derivatives.
#[derive(Clone, Copy)]
struct Tangential {
    d: usize,
    t: f64,
}

impl Tangential {
    fn value(&self, v: [f64; 2]) -> f64 {
        gaussian(self.d, v[0] * v[0] + v[1] * v[1], self.t)
    }
    fn grad(&self, v: [f64; 2], i: usize) -> f64 {
        -v[i] / (2.0 * self.t) * self.value(v)
    }
    fn hess(&self, v: [f64; 2], i: usize, j: usize) -> f64 {
        let delta = if i == j { 1.0 / (2.0 * self.t) } else { 0.0 };
        (v[i] * v[j] / (4.0 * self.t * self.t) - delta) * self.value(v)
    }
}

/// Shape of the tangential integrals behind the tensor entries.
struct Plane {
    d: usize,
    n: usize,
    x: [f64; 2],
    g: Tangential,
    window: f64,
}

impl Plane {
    fn new(p: &SpaceTimePoint, d: usize) -> Self {
        Self {
            d,
            n: p.n,
            x: p.tangential2(),
            g: Tangential { d, t: p.t },
            window: GAUSS_WINDOW * p.t.sqrt(),
        }
    }

    fn omega(&self) -> f64 {
        sphere_area(self.n)
    }

    fn reach(&self) -> f64 {
        (self.x[0] * self.x[0] + self.x[1] * self.x[1]).sqrt() + self.window
    }

    /// Newtonian potential at `(y, h)`.
    fn newton(&self, y: [f64; 2], h: f64) -> f64 {
        let rho2 = y[0] * y[0] + y[1] * y[1] + h * h;
        if self.n == 2 {
            rho2.ln() / (4.0 * PI)
        } else {
            -1.0 / (self.omega() * rho2.sqrt())
        }
    }

    /// `D_n N(y, h)`.
    fn newton_dn(&self, y: [f64; 2], h: f64) -> f64 {
        let rho2 = y[0] * y[0] + y[1] * y[1] + h * h;
        h / (self.omega() * rho2.powf(0.5 * self.n as f64))
    }

    /// Integral over the Gaussian window of `f(y)`, polar about the origin.
    fn windowed<F>(&self, r0: f64, breaks: &[f64], f: F, q: &QuadratureSpec) -> Result<f64>
    where
        F: FnMut([f64; 2]) -> Result<f64>,
    {
        let region = PolarRegion::annulus(self.d, [0.0, 0.0], r0, self.reach().max(r0))
            .within(self.x, self.window)
            .with_breaks(breaks.iter().copied());
        Ok(region.integrate(f, q)?.value)
    }

    /// `int g(X - y) K(y) dy` for a kernel odd about the origin, regularized
    /// by subtracting `g(X)` on the disc of radius `rho`.
    fn odd_kernel<K>(&self, kernel: K, rho: f64, scale: f64, q: &QuadratureSpec) -> Result<f64>
    where
        K: Fn([f64; 2]) -> f64,
    {
        let gx = self.g.value(self.x);
        let sub = |y: [f64; 2]| [self.x[0] - y[0], self.x[1] - y[1]];
        let inner = PolarRegion::annulus(self.d, [0.0, 0.0], 0.0, rho)
            .with_breaks([scale])
            .integrate(|y| Ok((self.g.value(sub(y)) - gx) * kernel(y)), q)?
            .value;
        let outer = self.windowed(rho, &[scale], |y| Ok(self.g.value(sub(y)) * kernel(y)), q)?;
        Ok(inner + outer)
    }
}

/// `U_ij(h) = int g(X - y) D_i D_j N(y, h) dy` with 0-based indices, the
/// normal index being `d`.
fn plane_hessian(plane: &Plane, i: usize, j: usize, h: f64, q: &QuadratureSpec) -> Result<f64> {
    let d = plane.d;
    let x = plane.x;
    let sub = move |y: [f64; 2]| [x[0] - y[0], x[1] - y[1]];
    let rho = plane.g.t.sqrt();
    let n = plane.n as f64;
    let omega = plane.omega();
    match (i == d, j == d) {
        (false, false) => plane.windowed(
            0.0,
            &[h],
            |y| Ok(plane.g.hess(sub(y), i, j) * plane.newton(y, h)),
            q,
        ),
        (true, false) => plane.windowed(
            0.0,
            &[h],
            |y| Ok(plane.g.grad(sub(y), j) * plane.newton_dn(y, h)),
            q,
        ),
        (false, true) => {
            let c = -n * h / omega;
            plane.odd_kernel(
                |y| {
                    let rho2 = y[0] * y[0] + y[1] * y[1] + h * h;
                    c * y[i] / rho2.powf(0.5 * n + 1.0)
                },
                rho,
                h,
                q,
            )
        }
        (true, true) => {
            let kernel = |y: [f64; 2]| {
                let rho2 = y[0] * y[0] + y[1] * y[1] + h * h;
                (rho2 - n * h * h) / (omega * rho2.powf(0.5 * n + 1.0))
            };
            let gx = plane.g.value(x);
            let gradx = [plane.g.grad(x, 0), plane.g.grad(x, 1)];
            let taylor = |y: [f64; 2]| gx - gradx[0] * y[0] - gradx[1] * y[1];
            let inner = PolarRegion::annulus(d, [0.0, 0.0], 0.0, rho)
                .with_breaks([h])
                .integrate(|y| Ok((plane.g.value(sub(y)) - taylor(y)) * kernel(y)), q)?
                .value;
            // Closed-form disc integral of the kernel itself.
            let disc = if plane.n == 3 {
                -0.5 * rho * rho / (rho * rho + h * h).powf(1.5)
            } else {
                -rho / (PI * (h * h + rho * rho))
            };
            let outer = plane.windowed(rho, &[h], |y| Ok(plane.g.value(sub(y)) * kernel(y)), q)?;
            Ok(inner + gx * disc + outer)
        }
    }
}

fn tensor_indices(i: usize, j: usize, n: usize) -> Result<(usize, usize)> {
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(invalid(format!(
            "tensor indices ({i}, {j}) outside 1..={n}"
        )));
    }
    Ok((i - 1, j - 1))
}

/// `int_0^{x_n} D^k Gamma_1(z_n, t) U_ij(x_n - z_n) dz_n`.
fn normal_integral(
    plane: &Plane,
    i0: usize,
    j0: usize,
    p: &SpaceTimePoint,
    k: usize,
    q: &QuadratureSpec,
) -> Result<f64> {
    let (xn, t) = (p.x_normal, p.t);
    let inner_q = q.scaled(0.1);
    Ok(integrate_pieces(
        |zn| {
            let weight = heat_kernel_1d_deriv(k, zn, t)?;
            if weight == 0.0 {
                return Ok(0.0);
            }
            Ok(weight * plane_hessian(plane, i0, j0, xn - zn, &inner_q)?)
        },
        &[0.0, (xn - t.sqrt()).max(0.0), xn],
        q,
    )?
    .value)
}

/// `L_ij(x, t)` for `1 <= i, j <= n`.
///
/// The `j = n` entries include the contribution of the moving upper limit
/// of the normal integral.
pub fn tensor_l(i: usize, j: usize, p: &SpaceTimePoint, q: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    let d = tensor_point(p)?;
    let n = p.n;
    let (i0, j0) = tensor_indices(i, j, n)?;
    let plane = Plane::new(p, d);
    let bulk = normal_integral(&plane, i0, j0, p, 1, q)?;
    if j0 != d {
        return Ok(bulk);
    }
    let t = p.t;
    let edge = heat_kernel_1d_deriv(1, p.x_normal, t)?;
    let trace = if i0 == d {
        0.5 * plane.g.value(plane.x)
    } else {
        let omega = plane.omega();
        let nf = n as f64;
        plane.odd_kernel(
            |y| {
                let r2 = y[0] * y[0] + y[1] * y[1];
                y[i0] / (omega * r2.powf(0.5 * nf))
            },
            t.sqrt(),
            0.0,
            &q.scaled(0.1),
        )?
    };
    Ok(bulk + edge * trace)
}

/// `D_{x_n} L_ij(x, t)` for tangential `j`. Since `D Gamma_1(0, t) = 0` the
/// derivative only moves onto the heat factor.
pub fn tensor_l_dxn(i: usize, j: usize, p: &SpaceTimePoint, q: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    let d = tensor_point(p)?;
    let (i0, j0) = tensor_indices(i, j, p.n)?;
    if j0 == d {
        return Err(invalid(
            "normal derivative is implemented for tangential j only",
        ));
    }
    normal_integral(&Plane::new(p, d), i0, j0, p, 2, q)
}

/// `B_in(x, t)` for tangential `1 <= i <= n - 1`.
pub fn tensor_b(i: usize, p: &SpaceTimePoint, q: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    let d = tensor_point(p)?;
    if !(1..=d).contains(&i) {
        return Err(invalid(format!("B index {i} outside 1..={d}")));
    }
    let split = crate::riesz::gauss_riesz_component(i, &p.x_tangential, p.t, q)?;
    let scale = heat_kernel_1d_deriv(1, p.x_normal, p.t)? * (4.0 * PI * p.t).powf(-0.5 * d as f64)
        / sphere_area(p.n);
    Ok(scale * split.total)
}

/// Reference value `1/2 D_{x_n} Gamma(x, t)` of the trace of `L`.
pub fn half_normal_derivative(p: &SpaceTimePoint) -> Result<f64> {
    let d = p.n - 1;
    Ok(0.5 * heat_kernel_1d_deriv(1, p.x_normal, p.t)? * gaussian(d, p.tangential_norm_sq(), p.t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(xt: &[f64], xn: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(xt.to_vec(), xn, t).unwrap()
    }

    #[test]
    fn heat_kernel_basics() {
        assert_eq!(heat_kernel(&point(&[1.0, 2.0], 0.5, -0.5)), 0.0);
        assert_eq!(heat_kernel(&point(&[1.0, 2.0], 0.5, 0.0)), 0.0);
        let p = point(&[0.0, 0.0], 0.0, 1.0 / (4.0 * PI));
        assert!((heat_kernel(&p) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_derivatives() {
        assert_eq!(heat_kernel_1d_deriv(1, 0.0, 1.0).unwrap(), 0.0);
        assert!((heat_kernel_1d_deriv(0, 0.0, 1.0 / (4.0 * PI)).unwrap() - 1.0).abs() < 1e-14);
        assert!(heat_kernel_1d_deriv(4, 0.0, 1.0).is_err());
        assert!(heat_kernel_1d_deriv(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &(x, t) in &[(0.3, 0.2), (-1.1, 0.7), (2.0, 1.5)] {
            for k in 1..=3 {
                let h = 1e-4;
                let fd = (heat_kernel_1d_deriv(k - 1, x + h, t).unwrap()
                    - heat_kernel_1d_deriv(k - 1, x - h, t).unwrap())
                    / (2.0 * h);
                let exact = heat_kernel_1d_deriv(k, x, t).unwrap();
                assert!((fd - exact).abs() < 1e-6, "k={k} x={x} t={t}");
            }
        }
    }

    #[test]
    fn newtonian_values() {
        assert_eq!(newtonian(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((newtonian(&[0.0, 1.0, 0.0]).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(newtonian(&[0.0, 0.0, 0.0]).is_err());
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn newtonian_gradient_and_hessian_match_differences() {
        let x = [0.7, -0.4, 0.9];
        let g = newtonian_gradient(&x).unwrap();
        let hess = newtonian_hessian(&x).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (newtonian(&xp).unwrap() - newtonian(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
            let gp = newtonian_gradient(&xp).unwrap();
            let gm = newtonian_gradient(&xm).unwrap();
            for j in 0..3 {
                assert!(((gp[j] - gm[j]) / (2.0 * h) - hess[j * 3 + i]).abs() < 1e-7);
            }
        }
        let trace = hess[0] + hess[4] + hess[8];
        assert!(trace.abs() < 1e-14);
    }

    #[test]
    fn convolution_reproduces_semigroup() {
        let x = [0.4, -0.3, 0.8];
        let lhs = heat_convolution(&x, 0.3, 0.5, 40).unwrap();
        let rhs = gaussian(3, x.iter().map(|v| v * v).sum(), 0.8);
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} {rhs}");
    }

    #[test]
    fn tensor_entry_validation() {
        let q = QuadratureSpec::default();
        let p = point(&[1.0, 0.0], 0.5, 0.2);
        assert!(tensor_l(0, 1, &p, &q).is_err());
        assert!(tensor_l(1, 4, &p, &q).is_err());
        assert!(tensor_b(3, &p, &q).is_err());
        let boundary = point(&[1.0, 0.0], 0.0, 0.2);
        assert!(tensor_l(1, 1, &boundary, &q).is_err());
        let high = point(&[1.0, 0.0, 0.0], 0.5, 0.2);
        assert!(tensor_l(1, 1, &high, &q).is_err());
    }

    #[test]
    fn trace_of_l_in_two_dimensions() {
        let q = QuadratureSpec::default();
        let p = point(&[0.6], 0.4, 0.3);
        let trace = tensor_l(1, 1, &p, &q).unwrap() + tensor_l(2, 2, &p, &q).unwrap();
        let expected = half_normal_derivative(&p).unwrap();
        assert!((trace - expected).abs() < 1e-7, "{trace} vs {expected}");
    }

    #[test]
    fn normal_derivative_matches_differences() {
        let q = QuadratureSpec::default();
        let h = 1e-4;
        let at = |xn: f64| point(&[1.3], xn, 0.4);
        let fd = (tensor_l(2, 1, &at(0.5 + h), &q).unwrap()
            - tensor_l(2, 1, &at(0.5 - h), &q).unwrap())
            / (2.0 * h);
        let exact = tensor_l_dxn(2, 1, &at(0.5), &q).unwrap();
        assert!((fd - exact).abs() < 1e-6, "{fd} {exact}");
        assert!(tensor_l_dxn(1, 2, &at(0.5), &q).is_err());
    }
}
