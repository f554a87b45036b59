//! Contact-type certification of `Sigma_{C,h}`.
//!
//! Chart order is `(q, p, phi, theta)` throughout. The symplectic form is
//! `omega = dp ^ dq + C^{3/2} cos(theta) dphi ^ dtheta`, and the Liouville
//! field `X` satisfies `L_X omega = omega`. Its `(q, p)` part is a central
//! field scaled by 1/2 around `O = (f2, f1)`, the peak of the fiber over
//! `(theta, phi)`; its angular part is `(f3, f4) / 2`.
//!
//! Formulas carrying `csc(theta)` are evaluated after multiplying through by
//! `sin^2(theta)`, which makes them regular at the equator and reproduces the
//! `theta -> 0` limits without a separate branch.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::level_sets::{self, admissible};
use crate::model::{ParamPair, SphericalPoint};
use crate::par::{self, Execution};
use crate::tolerances::Tolerances;

/// Largest `|theta|` at which the permitted band is evaluated.
pub const THETA_CLAMP: f64 = FRAC_PI_2 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TangentVector4 {
    pub dq: f64,
    pub dp: f64,
    pub dphi: f64,
    pub dtheta: f64,
}

impl TangentVector4 {
    pub fn to_array(&self) -> [f64; 4] {
        [self.dq, self.dp, self.dphi, self.dtheta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        TangentVector4 { dq: a[0], dp: a[1], dphi: a[2], dtheta: a[3] }
    }

    pub fn dot(&self, g: [f64; 4]) -> f64 {
        self.to_array().iter().zip(g).map(|(a, b)| a * b).sum()
    }
}

/// `omega[i][j]`, the coefficient of `dx_i ^ dx_j`.
pub fn symplectic_matrix(theta: f64, c: f64) -> [[f64; 4]; 4] {
    let g = c.powf(1.5) * theta.cos();
    let mut w = [[0.0; 4]; 4];
    w[1][0] = 1.0;
    w[0][1] = -1.0;
    w[2][3] = g;
    w[3][2] = -g;
    w
}

/// `C cos(theta) sin(theta) sin(phi) + 1`, i.e. `sin^2(theta)` times the
/// denominator `C cot(theta) sin(phi) + csc^2(theta)` of the peak angle.
fn peak_den_scaled(st: f64, ct: f64, sp: f64, c: f64) -> f64 {
    c * ct * st * sp + 1.0
}

/// `q` maximizing the fiber radicand: `arctan(2C / (C cot(theta) sin(phi) +
/// csc^2(theta)))` on the branch `(0, pi)`. Tends to 0 at the equator.
pub fn q_peak(theta: f64, phi: f64, c: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let e = peak_den_scaled(st, ct, phi.sin(), c);
    (2.0 * c * st * st).atan2(e)
}

/// `O = (f1, f2)`: the fiber center in `p` and `q`.
pub fn liouville_center(theta: f64, phi: f64, c: f64) -> (f64, f64) {
    (0.5 * c.sqrt() * theta.cos() * phi.cos(), q_peak(theta, phi, c))
}

/// Angular components `(f3, f4)` before the factor 1/2.
fn angular_components(q: f64, p: f64, theta: f64, phi: f64, c: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let rc = c.sqrt();
    let e = peak_den_scaled(st, ct, sp, c);
    let s2 = st * st;
    // sin^4(theta) (4C^2 + D^2)
    let k = 4.0 * c * c * s2 * s2 + e * e;
    let f3 = 2.0 * p * st * (c * sp * st + 2.0 * ct) / (ct * rc * k) + q * st / ct * cp / (2.0 * c);
    let f4 = 2.0 * rc * p * s2 * st * cp / k + 2.0 * st / ct - q * sp / (2.0 * c);
    (f3, f4)
}

pub fn liouville_field(q: f64, p: f64, theta: f64, phi: f64, c: f64) -> TangentVector4 {
    let (f1, f2) = liouville_center(theta, phi, c);
    let (f3, f4) = angular_components(q, p, theta, phi, c);
    TangentVector4 { dq: 0.5 * (q - f2), dp: 0.5 * (p - f1), dphi: 0.5 * f3, dtheta: 0.5 * f4 }
}

pub fn liouville_field_at(sp: &SphericalPoint) -> TangentVector4 {
    liouville_field(sp.q, sp.p, sp.theta, sp.phi, sp.c)
}

/// `max |L_X omega - omega|` for an arbitrary field `x -> X(x)` in chart
/// order, with the Jacobian of `X` from central differences of step
/// `step * max(1, |x_i|)`.
pub fn lie_residual_of<F>(field: F, at: [f64; 4], c: f64, step: f64) -> f64
where
    F: Fn([f64; 4]) -> [f64; 4],
{
    let w = symplectic_matrix(at[3], c);
    // d omega[2][3] / d theta
    let dg = -c.powf(1.5) * at[3].sin();
    let x = field(at);
    // jac[k][i] = d X^k / d x_i
    let mut jac = [[0.0; 4]; 4];
    for i in 0..4 {
        let hstep = step * at[i].abs().max(1.0);
        let mut a = at;
        let mut b = at;
        a[i] += hstep;
        b[i] -= hstep;
        let (fa, fb) = (field(a), field(b));
        for k in 0..4 {
            jac[k][i] = (fa[k] - fb[k]) / (2.0 * hstep);
        }
    }
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let mut l = 0.0;
            if (i, j) == (2, 3) {
                l += x[3] * dg;
            } else if (i, j) == (3, 2) {
                l -= x[3] * dg;
            }
            for k in 0..4 {
                l += w[k][j] * jac[k][i] + w[i][k] * jac[k][j];
            }
            worst = worst.max((l - w[i][j]).abs());
        }
    }
    worst
}

fn field_array(c: f64) -> impl Fn([f64; 4]) -> [f64; 4] {
    move |x: [f64; 4]| liouville_field(x[0], x[1], x[3], x[2], c).to_array()
}

/// Lie-derivative residual of the Liouville field at a point.
pub fn lie_derivative_residual(q: f64, p: f64, theta: f64, phi: f64, c: f64, step: f64) -> Result<f64> {
    if !(0.05..=1.45).contains(&theta.abs()) {
        return Err(Error::Precondition(format!("|theta| = {} outside [0.05, 1.45]", theta.abs())));
    }
    if !(1e-7..=1e-4).contains(&step) {
        return Err(Error::Precondition(format!("step = {step} outside [1e-7, 1e-4]")));
    }
    Ok(lie_residual_of(field_array(c), [q, p, phi, theta], c, step))
}

/// Same as [`lie_derivative_residual`] without the range restrictions.
pub fn lie_derivative_residual_unchecked(sp: &SphericalPoint, step: f64) -> f64 {
    lie_residual_of(field_array(sp.c), [sp.q, sp.p, sp.phi, sp.theta], sp.c, step)
}

/// Radicand of the `p`-quadratic of `H = h` as a function of `q`.
pub fn fiber_radicand(q: f64, theta: f64, phi: f64, c: f64, h: f64) -> f64 {
    let xi = q.cos() / q.sin();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    -4.0 * c * st * st * xi * xi + 4.0 * (c * st * ct * sp + 1.0) * xi + c * ct * ct * cp * cp - 2.0 * c
        + 4.0 * h
}

/// Real `p` with `H(q, p, theta, phi) = h`, in increasing order.
pub fn p_branches(q: f64, theta: f64, phi: f64, c: f64, h: f64) -> Vec<f64> {
    let r = fiber_radicand(q, theta, phi, c, h);
    let mid = 0.5 * c.sqrt() * theta.cos() * phi.cos();
    if r.abs() < 1e-12 {
        vec![mid]
    } else if r > 0.0 {
        let d = 0.5 * r.sqrt();
        vec![mid - d, mid + d]
    } else {
        Vec::new()
    }
}

/// An elliptic fiber in the `(q, p)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberCurve {
    pub theta: f64,
    pub phi: f64,
    pub c: f64,
    pub h: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub q_peak: f64,
    pub p_center: f64,
}

/// The fiber over `(theta, phi)` when it is an ellipse (`theta != 0` and
/// admissibility positive).
pub fn fiber_curve(theta: f64, phi: f64, c: f64, h: f64) -> Option<FiberCurve> {
    let pp = ParamPair { c, h };
    if theta == 0.0 || !(admissible(theta, phi, pp) > 0.0) {
        return None;
    }
    let (st, ct) = theta.sin_cos();
    let a = -4.0 * c * st * st;
    let b = 4.0 * (c * st * ct * phi.sin() + 1.0);
    let k = c * ct * ct * phi.cos().powi(2) - 2.0 * c + 4.0 * h;
    let d = b * b - 4.0 * a * k;
    if d <= 0.0 {
        return None;
    }
    let t = -0.5 * (b + b.signum() * d.sqrt());
    let (x1, x2) = (t / a, k / t);
    let (xlo, xhi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    Some(FiberCurve {
        theta,
        phi,
        c,
        h,
        q_min: 1f64.atan2(xhi),
        q_max: 1f64.atan2(xlo),
        q_peak: q_peak(theta, phi, c),
        p_center: 0.5 * c.sqrt() * ct * phi.cos(),
    })
}

/// `X(H)` on the equator reduces to this positive expression (up to the
/// `d/dtheta` contribution, see [`equator_liouville_derivative`]).
pub fn equator_transversality(p: f64, q: f64, phi: f64, c: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    let a = s2 * p - c.sqrt() * phi.cos() / s2;
    let sq = q.sin();
    a * a + q / (sq * sq)
}

/// Exact `X(H)` at `theta = 0`: half the equator transversality plus the
/// `theta`-direction term `q cot(q) sin^2(phi) / 4`.
pub fn equator_liouville_derivative(p: f64, q: f64, phi: f64, c: f64) -> f64 {
    let sp = phi.sin();
    0.5 * equator_transversality(p, q, phi, c) + 0.25 * q * q.cos() / q.sin() * sp * sp
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub p: f64,
    pub q: f64,
    pub sin_phi: f64,
    pub cos_phi: f64,
    pub phi: f64,
}

/// `sin(phi)` on the boundary of the image at latitude `theta`:
/// `(C - 2h) tan(theta) - csc(2 theta) / C - C sin(theta) cos(theta) / 2`.
pub fn boundary_sin_phi(theta: f64, c: f64, h: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    (c - 2.0 * h) * st / ct - 1.0 / (2.0 * st * ct * c) - 0.5 * c * st * ct
}

/// The boundary point over latitude `theta` and its single-point fiber.
pub fn boundary_preimage(theta: f64, c: f64, h: f64, branch: f64) -> Result<BoundaryPoint> {
    if theta == 0.0 || !(theta.abs() < FRAC_PI_2) {
        return Err(Error::OutOfBand { theta });
    }
    let s = boundary_sin_phi(theta, c, h);
    if !(s.abs() <= 1.0 + 1e-12) {
        return Err(Error::OutOfBand { theta });
    }
    let s = s.clamp(-1.0, 1.0);
    let cp = if branch < 0.0 { -1.0 } else { 1.0 } * (1.0 - s * s).sqrt();
    let phi = crate::model::wrap_angle(s.atan2(cp));
    let (p, q) = liouville_center(theta, phi, c);
    Ok(BoundaryPoint { p, q, sin_phi: s, cos_phi: cp, phi })
}

/// Outward normal of the image boundary in the `(phi, theta)` chart; equals
/// `-grad admissible`.
pub fn outward_normal(theta: f64, phi: f64, c: f64) -> (f64, f64) {
    let (st, ct) = theta.sin_cos();
    let cot = ct / st;
    (
        -2.0 * cot * phi.cos(),
        2.0 / (st * st) * (c * (c * st * st * st * ct + phi.sin()) + cot) / c,
    )
}

/// The boundary transversality function `F(theta)`: the outward normal
/// paired with `(f3, f4)` at the boundary preimage, written in closed form.
pub fn f_theta(theta: f64, c: f64, h: f64) -> Result<f64> {
    f_theta_in_band(theta, c, h, permitted_theta_interval(c, h))
}

fn f_theta_in_band(theta: f64, c: f64, h: f64, (lo, hi): (f64, f64)) -> Result<f64> {
    if theta == 0.0 || theta < lo || theta > hi {
        return Err(Error::OutOfBand { theta });
    }
    let s_phi = boundary_sin_phi(theta, c, h);
    if !(s_phi.abs() <= 1.0 + 1e-12) {
        return Err(Error::OutOfBand { theta });
    }
    Ok(f_theta_extended(theta, c, h))
}

/// Closed form of `F` without the `|sin(phi)| <= 1` check. Near the equator
/// no boundary point exists and this is the analytic extension matched by
/// [`f_theta_series`].
pub fn f_theta_extended(theta: f64, c: f64, h: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    let cs = 1.0 / s;
    let sec = 1.0 / co;
    let cot = co / s;
    let t = s / co;
    let c2t = (2.0 * theta).cos();
    let csc2 = 1.0 / (2.0 * theta).sin();
    // sig = -sin(phi) on the boundary, so 1 - sig^2 = cos^2(phi).
    let sig = 0.25 * t * (c * c2t - 3.0 * c + 8.0 * h) + csc2 / c;
    let cos2 = 1.0 - sig * sig;
    let w = cs * cs - c * (c * co * co - 2.0 * c + 4.0 * h);
    let den = 4.0 * c * c + 0.25 * w * w;
    let mut at = (4.0 * c * cs / (c * c * s + c * c * cs - 4.0 * c * h * cs + cs * cs * cs)).atan();
    if at <= 0.0 {
        at += PI;
    }
    let a = (c * c * (2.0 * theta).sin() - cot * (c * c - 2.0 * cs * cs) + 2.0 * c * (c - 2.0 * h) * cs * sec
        - cs * cs * cs * sec)
        / c;
    let b1 = c * cot * cos2 / den + t * (c * c * co * co - 2.0 * c * c + 4.0 * c * h + cs * cs) * at / (4.0 * c * c)
        + 2.0 * t;
    let b2 = t * at / c + 2.0 * cs * cs * (-0.25 * c * t * (c * c2t - 3.0 * c + 8.0 * h) + 2.0 * cot - csc2) / den;
    a * b1 - cot * cos2 * b2
}

/// `F(theta)` assembled from [`outward_normal`] and [`liouville_field`] at
/// [`boundary_preimage`] for the given `cos(phi)` branch.
pub fn f_theta_assembled(theta: f64, c: f64, h: f64, branch: f64) -> Result<f64> {
    let b = boundary_preimage(theta, c, h, branch)?;
    let n = outward_normal(theta, b.phi, c);
    let x = liouville_field(b.q, b.p, theta, b.phi, c);
    Ok(2.0 * (n.0 * x.dphi + n.1 * x.dtheta))
}

/// Three-term expansion of `F` at the equator.
pub fn f_theta_series(theta: f64, c: f64, h: f64) -> f64 {
    let t2 = theta * theta;
    (2.0 * c + 3.0) / (c * c * t2)
        + (1.0 / (c * c) + (36.0 * h - 4.0 / 3.0) / c + 2.0 * c - 8.0 * h - 17.0)
        + t2 * (c * (5.0 * c * (24.0 * (4.0 * c * c - 24.0 * c * h + c + 32.0 * h * h) - 24.0 * h - 127.0) - 28.0)
            + 3.0)
            / (15.0 * c * c)
}

/// `max_phi admissible(theta, phi)` for `0 < |theta| < pi/2`.
fn band_profile(theta: f64, c: f64, h: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    c * ct * ct + 1.0 / (st * st * c) - 2.0 * c + 2.0 * (ct / st).abs() + 4.0 * h
}

/// Symmetric latitude band `(-theta_b, theta_b)` around the equator on which
/// the image of the projection is non-empty. `theta_b` is the first zero of
/// [`band_profile`] going outward from the equator, or [`THETA_CLAMP`] when
/// there is none.
pub fn permitted_theta_interval(c: f64, h: f64) -> (f64, f64) {
    let g = |t: f64| band_profile(t, c, h);
    let (lo_ln, hi_ln) = (1e-12f64.ln(), THETA_CLAMP.ln());
    let m = 4000;
    let mut prev = 1e-12;
    let mut found = None;
    for k in 1..=m {
        let t = if k == m { THETA_CLAMP } else { (lo_ln + (hi_ln - lo_ln) * k as f64 / m as f64).exp() };
        if g(t) < 0.0 {
            found = Some((prev, t));
            break;
        }
        prev = t;
    }
    let Some((mut a, mut b)) = found else {
        return (-THETA_CLAMP, THETA_CLAMP);
    };
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    (-a, a)
}

/// Minimum of `F` over `n` equally spaced latitudes of the permitted band,
/// skipping the equator and latitudes without a boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FGridMin {
    pub min: Option<f64>,
    pub argmin: Option<f64>,
    pub evaluated: usize,
    pub skipped: usize,
}

pub fn f_theta_grid_min(c: f64, h: f64, n: usize, exec: Execution) -> FGridMin {
    let (lo, hi) = permitted_theta_interval(c, h);
    let vals = par::map_indexed(n, exec, |i| {
        let theta = if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
        f_theta_in_band(theta, c, h, (lo, hi)).ok().map(|v| (theta, v))
    });
    let mut out = FGridMin { min: None, argmin: None, evaluated: 0, skipped: 0 };
    for v in vals {
        match v {
            Some((theta, f)) => {
                out.evaluated += 1;
                if out.min.is_none_or(|m| f < m) {
                    out.min = Some(f);
                    out.argmin = Some(theta);
                }
            }
            None => out.skipped += 1,
        }
    }
    out
}

/// `X(H)` at a point, with the chart gradient of the spherical Hamiltonian.
pub fn liouville_derivative(sp: &SphericalPoint) -> f64 {
    liouville_field_at(sp).dot(sp.chart_gradient())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransversalityReport {
    pub min: f64,
    pub argmin: Option<SphericalPoint>,
    pub samples: usize,
}

/// `min X(H)` over `n` sampled points of `Sigma_{C,h}`; positive values
/// certify transversality of `X` on the sample only.
pub fn min_transversality(
    pp: ParamPair,
    n: usize,
    seed: u64,
    tol: &Tolerances,
    exec: Execution,
) -> Result<TransversalityReport> {
    let pts = level_sets::sample_level_set(pp, n, seed, tol, exec)?;
    let vals = par::map_slice(&pts, exec, liouville_derivative);
    let mut rep = TransversalityReport { min: f64::INFINITY, argmin: None, samples: pts.len() };
    for (v, p) in vals.iter().zip(&pts) {
        if *v < rep.min {
            rep.min = *v;
            rep.argmin = Some(*p);
        }
    }
    Ok(rep)
}

/// Bisects `h` in `[h_lo, h_hi]` for the transition between certified
/// (`min X(H) > 0` on an `n`-point sample) at `h_lo` and not certified at
/// `h_hi`. Returns `None` when the endpoints do not bracket a transition.
pub fn transversality_threshold(
    c: f64,
    h_lo: f64,
    h_hi: f64,
    n: usize,
    seed: u64,
    iterations: usize,
    tol: &Tolerances,
    exec: Execution,
) -> Result<Option<f64>> {
    let certified = |h: f64| -> Result<bool> {
        Ok(min_transversality(ParamPair::new(c, h)?, n, seed, tol, exec)?.min > 0.0)
    };
    if !certified(h_lo)? || certified(h_hi)? {
        return Ok(None);
    }
    let (mut a, mut b) = (h_lo, h_hi);
    for _ in 0..iterations {
        let m = 0.5 * (a + b);
        if certified(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(b))
}
