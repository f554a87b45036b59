//! Reduced phase space `(xi, p, m1, m2, m3)`, with `xi = cot q`.
//!
//! Every 5-vector and 5x5 matrix in this crate uses the coordinate order
//! `(xi, p, m1, m2, m3)`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Vec5 = [f64; 5];
pub type Mat5 = [[f64; 5]; 5];

pub const XI: usize = 0;
pub const P: usize = 1;
pub const M1: usize = 2;
pub const M2: usize = 3;
pub const M3: usize = 4;

/// A point of the reduced phase space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub xi: f64,
    pub p: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// A point `(q, p, theta, phi)` on `(0, pi) x R x S^2_C`, where the
/// body-frame angular momentum is
/// `m = sqrt(C) (cos(theta) cos(phi), cos(theta) sin(phi), sin(theta))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub q: f64,
    pub p: f64,
    pub theta: f64,
    pub phi: f64,
    pub c: f64,
}

/// Casimir level `C >= 0` and energy level `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamPair {
    pub c: f64,
    pub h: f64,
}

impl ParamPair {
    pub fn new(c: f64, h: f64) -> Result<Self> {
        if !c.is_finite() || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite (C, h) = ({c}, {h})")));
        }
        if c < 0.0 {
            return Err(Error::InvalidParameter(format!("C = {c} must be >= 0")));
        }
        Ok(ParamPair { c, h })
    }
}

/// `cot q` for a separation angle `q` in `(0, pi)`.
pub fn xi_of_q(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < PI) {
        return Err(Error::SeparationOutOfRange { q });
    }
    Ok(q.cos() / q.sin())
}

/// Inverse of [`xi_of_q`]: `arccot` with range `(0, pi)`.
pub fn q_of_xi(xi: f64) -> f64 {
    1.0f64.atan2(xi)
}

impl ReducedState {
    pub const fn new(xi: f64, p: f64, m1: f64, m2: f64, m3: f64) -> Self {
        ReducedState { xi, p, m1, m2, m3 }
    }

    pub fn from_array(v: Vec5) -> Self {
        ReducedState::new(v[XI], v[P], v[M1], v[M2], v[M3])
    }

    pub fn to_array(&self) -> Vec5 {
        [self.xi, self.p, self.m1, self.m2, self.m3]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn q(&self) -> f64 {
        q_of_xi(self.xi)
    }

    pub fn casimir(&self) -> f64 {
        self.m1 * self.m1 + self.m2 * self.m2 + self.m3 * self.m3
    }

    pub fn hamiltonian(&self) -> f64 {
        let ReducedState { xi, p, m1, m2, m3 } = *self;
        0.5 * (m1 * m1 + m2 * m2 - 2.0 * m1 * p
            + 2.0 * p * p
            + xi * (-2.0 - 2.0 * m2 * m3 + m3 * m3 * xi)
            + m3 * m3 * (1.0 + xi * xi))
    }

    pub fn grad_hamiltonian(&self) -> Vec5 {
        let ReducedState { xi, p, m1, m2, m3 } = *self;
        [
            -1.0 - m2 * m3 + 2.0 * m3 * m3 * xi,
            -m1 + 2.0 * p,
            m1 - p,
            m2 - xi * m3,
            -xi * m2 + m3 * xi * xi + m3 * (1.0 + xi * xi),
        ]
    }

    pub fn grad_casimir(&self) -> Vec5 {
        [0.0, 0.0, 2.0 * self.m1, 2.0 * self.m2, 2.0 * self.m3]
    }

    /// The Poisson tensor `Pi[i][j] = {x_i, x_j}`.
    pub fn poisson_matrix(&self) -> Mat5 {
        let mut pi = [[0.0; 5]; 5];
        let mut put = |i: usize, j: usize, v: f64| {
            pi[i][j] = v;
            pi[j][i] = -v;
        };
        put(XI, P, -(self.xi * self.xi + 1.0));
        put(M1, M2, -self.m3);
        put(M2, M3, -self.m1);
        put(M1, M3, self.m2);
        pi
    }

    /// `d[l][i][j] = d Pi[i][j] / d x_l`.
    pub fn poisson_matrix_partials(&self) -> [Mat5; 5] {
        let mut d = [[[0.0; 5]; 5]; 5];
        let mut put = |l: usize, i: usize, j: usize, v: f64| {
            d[l][i][j] = v;
            d[l][j][i] = -v;
        };
        put(XI, XI, P, -2.0 * self.xi);
        put(M3, M1, M2, -1.0);
        put(M1, M2, M3, -1.0);
        put(M2, M1, M3, 1.0);
        d
    }

    /// Reduced equations of motion `dx_i/dt = sum_j Pi[i][j] dH/dx_j`.
    pub fn hamiltonian_vector_field(&self) -> Vec5 {
        let pi = self.poisson_matrix();
        let g = self.grad_hamiltonian();
        let mut out = [0.0; 5];
        for (o, row) in out.iter_mut().zip(pi.iter()) {
            *o = row.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn to_spherical(&self) -> Result<SphericalPoint> {
        let c = self.casimir();
        if c <= 0.0 {
            return Err(Error::DegenerateCasimir);
        }
        let rho = self.m1.hypot(self.m2);
        let theta = self.m3.atan2(rho);
        let phi = if rho == 0.0 { 0.0 } else { wrap_angle(self.m2.atan2(self.m1)) };
        Ok(SphericalPoint { q: self.q(), p: self.p, theta, phi, c })
    }
}

/// Maps an angle into `[0, 2 pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl SphericalPoint {
    pub fn new(q: f64, p: f64, theta: f64, phi: f64, c: f64) -> Result<Self> {
        if !(q > 0.0 && q < PI) {
            return Err(Error::SeparationOutOfRange { q });
        }
        if !(theta.abs() <= 0.5 * PI) || !p.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spherical point (p, theta, phi) = ({p}, {theta}, {phi}) is invalid"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C = {c} must be > 0")));
        }
        Ok(SphericalPoint { q, p, theta, phi, c })
    }

    pub fn m(&self) -> [f64; 3] {
        let r = self.c.sqrt();
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [r * ct * cp, r * ct * sp, r * st]
    }

    pub fn to_reduced(&self) -> ReducedState {
        let [m1, m2, m3] = self.m();
        ReducedState { xi: self.q.cos() / self.q.sin(), p: self.p, m1, m2, m3 }
    }

    /// The energy written in spherical coordinates:
    /// `C sin^2(theta) cot^2(q) + p^2 - cot q
    ///  - cos(theta) (sqrt(C) p cos(phi) + C sin(theta) cot(q) sin(phi)) + C/2`.
    pub fn hamiltonian(&self) -> f64 {
        let SphericalPoint { q, p, theta, phi, c } = *self;
        let x = q.cos() / q.sin();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        c * st * st * x * x + p * p - x - ct * (c.sqrt() * p * cp + c * st * x * sp) + 0.5 * c
    }

    /// Sum of the absolute values of the terms of [`Self::hamiltonian`]; a
    /// natural scale for rounding error in that expression.
    pub fn hamiltonian_term_scale(&self) -> f64 {
        let SphericalPoint { q, p, theta, phi, c } = *self;
        let x = q.cos() / q.sin();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        (c * st * st * x * x).abs()
            + p * p
            + x.abs()
            + (ct * c.sqrt() * p * cp).abs()
            + (ct * c * st * x * sp).abs()
            + 0.5 * c
    }

    /// Gradient of [`Self::hamiltonian`] in chart order `(q, p, phi, theta)`.
    pub fn chart_gradient(&self) -> [f64; 4] {
        let SphericalPoint { q, p, theta, phi, c } = *self;
        let sq = q.sin();
        let x = q.cos() / sq;
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let rc = c.sqrt();
        let dh_dxi = 2.0 * c * st * st * x - 1.0 - c * ct * st * sp;
        let dq = -dh_dxi / (sq * sq);
        let dp = 2.0 * p - ct * rc * cp;
        let dphi = -ct * (-rc * p * sp + c * st * x * cp);
        let dtheta = 2.0 * c * st * ct * x * x + st * (rc * p * cp + c * st * x * sp)
            - ct * c * ct * x * sp;
        [dq, dp, dphi, dtheta]
    }
}

/// Number of singular values above `rel * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

pub fn mat5_to_dmatrix(m: &Mat5) -> DMatrix<f64> {
    DMatrix::from_fn(5, 5, |i, j| m[i][j])
}
