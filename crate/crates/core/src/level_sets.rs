//! Common level sets `Sigma_{C,h} = {Casimir = C, H = h}` and their
//! projection onto the Casimir sphere `S^2_C`.
//!
//! A point `m` of the sphere lies in the image of the projection iff its
//! fiber (a conic in the `(xi, p)` plane) is non-empty. The complement of the
//! image is a union of open disks ("holes"); their number fixes the topology
//! of the compactified level set.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bifurcation;
use crate::contact;
use crate::error::{Error, Result};
use crate::model::{numerical_rank, ParamPair, ReducedState, SphericalPoint};
use crate::par::{self, Execution};
use crate::roots::isolate_roots;
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberType {
    Ellipse,
    Parabola,
    Point,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyClass {
    /// `S^1 x S^2`: zero or two holes.
    S1xS2,
    /// Connected sum of three copies of `S^1 x S^2`: four holes.
    ConnSum3S1xS2,
    /// `C = 0`.
    Circle,
    Empty,
    OnBifurcation,
}

impl TopologyClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TopologyClass::S1xS2 => "S1xS2",
            TopologyClass::ConnSum3S1xS2 => "ConnSum3_S1xS2",
            TopologyClass::Circle => "Circle",
            TopologyClass::Empty => "Empty",
            TopologyClass::OnBifurcation => "OnBifurcation",
        }
    }
}

/// Right-hand side of the completed-square form of `H = h` at the
/// projection point `m`; the fiber over `m` is an ellipse when positive.
pub fn fiber_rhs(m: [f64; 3], pp: ParamPair) -> Result<f64> {
    let [m1, m2, m3] = m;
    if m3 == 0.0 {
        return Err(Error::Equator);
    }
    let k = m2 * m3 + 1.0;
    Ok(2.0 * pp.h - pp.c + 0.5 * m1 * m1 + k * k / (2.0 * m3 * m3))
}

pub fn classify_fiber(m: [f64; 3], pp: ParamPair, tol: f64) -> FiberType {
    match fiber_rhs(m, pp) {
        Err(_) => FiberType::Parabola,
        Ok(r) if r > tol => FiberType::Ellipse,
        Ok(r) if r < -tol => FiberType::Empty,
        Ok(_) => FiberType::Point,
    }
}

/// Admissibility in spherical angles; non-negative iff `(theta, phi)` lies
/// in the image of the projection. Equals `2 fiber_rhs` at the same point.
pub fn admissible(theta: f64, phi: f64, pp: ParamPair) -> f64 {
    let c = pp.c;
    let (st, ct) = theta.sin_cos();
    c * ct * ct + 1.0 / (st * st * c) - 2.0 * c + 2.0 * ct / st * phi.sin() + 4.0 * pp.h
}

/// Admissibility at the poles `theta = +-pi/2`.
pub fn pole_admissible_value(pp: ParamPair) -> f64 {
    1.0 / pp.c - 2.0 * pp.c + 4.0 * pp.h
}

/// Boundary crossings of the image with the great circle `m1 = 0`, written as
/// roots `y = m3^2` in `(0, C]` of the quartic from
/// [`bifurcation::quartic_coeffs`], each with the `m2` it forces when
/// `m3 = +sqrt(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCrossing {
    pub y: f64,
    pub m2: f64,
}

pub fn boundary_crossings(pp: ParamPair, tol: &Tolerances) -> Result<Vec<BoundaryCrossing>> {
    if !(pp.c > 0.0) {
        return Err(Error::InvalidParameter(format!("C = {} must be > 0", pp.c)));
    }
    let coeffs = bifurcation::quartic_coeffs(pp);
    let roots = isolate_roots(&coeffs, 0.0, pp.c, tol.root_cluster_width, tol.root_refine_width)?;
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        if !r.is_simple() {
            return Err(Error::DegenerateRoot { y: r.value, multiplicity: r.multiplicity });
        }
        let y = r.value;
        // Unsquared boundary relation on m1 = 0 solved for m2; squaring it
        // against m2^2 = C - y produces the quartic.
        let m2 = (y * y + (pp.c - 4.0 * pp.h) * y - 1.0) / (2.0 * y.sqrt());
        out.push(BoundaryCrossing { y, m2 });
    }
    Ok(out)
}

/// Number of holes in the image of the projection, from the quartic roots.
///
/// Holes are symmetric under `m -> (m1, -m2, -m3)`. Each crossing with
/// `m2 <= 0` enters a hole through the left half of the `m1 = 0` circle;
/// the poles close off one more pair when they are inadmissible.
pub fn hole_count_fast(pp: ParamPair, tol: &Tolerances) -> Result<usize> {
    let crossings = boundary_crossings(pp, tol)?;
    let left = crossings.iter().filter(|b| b.m2 <= 0.0).count();
    Ok(2 * left.div_ceil(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCount {
    pub holes: usize,
    /// Cell count of the smallest inadmissible component.
    pub smallest_component: usize,
    /// Set when a component spans fewer than four cells.
    pub resolution_warning: bool,
}

/// Brute-force hole count: rasterize the inadmissible set on a cell-centred
/// `(theta, phi)` grid and count its 4-connected components, with `phi`
/// wrapping and each polar row collapsed to a single cell.
pub fn hole_count_oracle(pp: ParamPair, n_theta: usize, n_phi: usize, exec: Execution) -> Result<OracleCount> {
    if !(pp.c > 0.0) {
        return Err(Error::InvalidParameter(format!("C = {} must be > 0", pp.c)));
    }
    if n_theta < 128 || n_phi < 256 {
        return Err(Error::InvalidParameter(format!("grid {n_theta}x{n_phi} is below 128x256")));
    }
    let phis: Vec<f64> = (0..n_phi).map(|j| (j as f64 + 0.5) * TAU / n_phi as f64).collect();
    let rows = par::map_indexed(n_theta, exec, |i| {
        let theta = -FRAC_PI_2 + (i as f64 + 0.5) * PI / n_theta as f64;
        phis.iter().map(|&phi| admissible(theta, phi, pp) < 0.0).collect::<Vec<bool>>()
    });
    let bad: Vec<bool> = rows.concat();
    let idx = |i: usize, j: usize| i * n_phi + j;
    let mut seen = vec![false; bad.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..bad.len() {
        if !bad[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut size = 0;
        let mut pole_rows_done = [false, false];
        while let Some(k) = queue.pop_front() {
            size += 1;
            let (i, j) = (k / n_phi, k % n_phi);
            let mut visit = |n: usize, queue: &mut VecDeque<usize>| {
                if bad[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            };
            visit(idx(i, (j + 1) % n_phi), &mut queue);
            visit(idx(i, (j + n_phi - 1) % n_phi), &mut queue);
            if i > 0 {
                visit(idx(i - 1, j), &mut queue);
            }
            if i + 1 < n_theta {
                visit(idx(i + 1, j), &mut queue);
            }
            for (slot, row) in [(0usize, 0usize), (1, n_theta - 1)] {
                if i == row && !pole_rows_done[slot] {
                    pole_rows_done[slot] = true;
                    for jj in 0..n_phi {
                        visit(idx(row, jj), &mut queue);
                    }
                }
            }
        }
        sizes.push(size);
    }
    let smallest = sizes.iter().copied().min().unwrap_or(0);
    Ok(OracleCount {
        holes: sizes.len(),
        smallest_component: smallest,
        resolution_warning: !sizes.is_empty() && smallest < 4,
    })
}

pub fn classify_topology(pp: ParamPair, tol: &Tolerances) -> TopologyClass {
    if !(pp.c >= 0.0) {
        return TopologyClass::Empty;
    }
    if pp.c == 0.0 {
        return TopologyClass::Circle;
    }
    if bifurcation::is_on_bifurcation(pp, tol.bifurcation) {
        return TopologyClass::OnBifurcation;
    }
    match hole_count_fast(pp, tol) {
        Ok(4) => TopologyClass::ConnSum3S1xS2,
        Ok(_) => TopologyClass::S1xS2,
        Err(_) => TopologyClass::OnBifurcation,
    }
}

/// A point of the compactified level set: `(x, y, z)` on the unit sphere
/// (inverse stereographic image of `(xi, p)`, with `z = 1` the added point)
/// and `m` on `S^2_C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl CompactPoint {
    pub fn from_state(s: &ReducedState) -> Self {
        let r2 = s.xi * s.xi + s.p * s.p;
        let d = r2 + 1.0;
        CompactPoint {
            x: 2.0 * s.xi / d,
            y: 2.0 * s.p / d,
            z: (r2 - 1.0) / d,
            m1: s.m1,
            m2: s.m2,
            m3: s.m3,
        }
    }

    /// The point added over `m` by the compactification.
    pub fn at_infinity(m: [f64; 3]) -> Self {
        CompactPoint { x: 0.0, y: 0.0, z: 1.0, m1: m[0], m2: m[1], m3: m[2] }
    }

    fn m_sq(&self) -> f64 {
        self.m1 * self.m1 + self.m2 * self.m2 + self.m3 * self.m3
    }
}

/// `(|m|^2 - C, x^2 + y^2 + z^2 - 1, P3)` where `P3 = (1 - z)^2 (2H - 2h)`
/// written polynomially in `(x, y, z, m)`.
pub fn compactified_residuals(cp: &CompactPoint, pp: ParamPair) -> [f64; 3] {
    let CompactPoint { x, y, z, m1, m2, m3 } = *cp;
    let w = 1.0 - z;
    let msq = cp.m_sq();
    [
        msq - pp.c,
        x * x + y * y + z * z - 1.0,
        (msq - 2.0 * pp.h) * w * w + 2.0 * y * y - 2.0 * m1 * y * w + 2.0 * m3 * m3 * x * x
            - 2.0 * x * w * (1.0 + m2 * m3),
    ]
}

/// Rows `(x, y, z, m1, m2, m3)`; columns are the gradients of the unit
/// sphere, the Casimir sphere and `P3`, in the form used for the smoothness
/// argument. Its third column differs from the true gradient of `P3` by
/// `(1 - z)^2` times the second column, so both have the same rank.
pub fn jacobian_matrix(cp: &CompactPoint, pp: ParamPair) -> [[f64; 3]; 6] {
    let CompactPoint { x, y, z, m1, m2, m3 } = *cp;
    let w = 1.0 - z;
    [
        [2.0 * x, 0.0, 4.0 * m3 * m3 * x - 2.0 * w * (1.0 + m2 * m3)],
        [2.0 * y, 0.0, 4.0 * y - 2.0 * m1 * w],
        [2.0 * z, 0.0, -(2.0 * pp.c - 4.0 * pp.h) * w + 2.0 * m1 * y + 2.0 * x * (1.0 + m2 * m3)],
        [0.0, 2.0 * m1, -2.0 * y * w],
        [0.0, 2.0 * m2, -2.0 * x * w * m3],
        [0.0, 2.0 * m3, 4.0 * m3 * x * x - 2.0 * x * w * m2],
    ]
}

/// The exact Jacobian of [`compactified_residuals`], same layout.
pub fn jacobian_exact(cp: &CompactPoint, pp: ParamPair) -> [[f64; 3]; 6] {
    let CompactPoint { x, y, z, m1, m2, m3 } = *cp;
    let w = 1.0 - z;
    let msq = cp.m_sq();
    [
        [2.0 * x, 0.0, 4.0 * m3 * m3 * x - 2.0 * w * (1.0 + m2 * m3)],
        [2.0 * y, 0.0, 4.0 * y - 2.0 * m1 * w],
        [2.0 * z, 0.0, -2.0 * (msq - 2.0 * pp.h) * w + 2.0 * m1 * y + 2.0 * x * (1.0 + m2 * m3)],
        [0.0, 2.0 * m1, 2.0 * m1 * w * w - 2.0 * y * w],
        [0.0, 2.0 * m2, 2.0 * m2 * w * w - 2.0 * x * w * m3],
        [0.0, 2.0 * m3, 2.0 * m3 * w * w + 4.0 * m3 * x * x - 2.0 * x * w * m2],
    ]
}

fn rank6x3(j: &[[f64; 3]; 6], rel: f64) -> usize {
    numerical_rank(&DMatrix::from_fn(6, 3, |r, c| j[r][c]), rel)
}

/// Numerical rank of [`jacobian_matrix`] at an on-variety point.
pub fn jacobian_rank(cp: &CompactPoint, pp: ParamPair, tol: &Tolerances) -> Result<usize> {
    let res = compactified_residuals(cp, pp);
    if res.iter().any(|r| !(r.abs() < 1e-8)) {
        return Err(Error::Precondition(format!("point is off the compactified level set: residuals {res:?}")));
    }
    Ok(rank6x3(&jacobian_matrix(cp, pp), tol.rank_relative))
}

pub fn jacobian_exact_rank(cp: &CompactPoint, pp: ParamPair, tol: &Tolerances) -> usize {
    rank6x3(&jacobian_exact(cp, pp), tol.rank_relative)
}

/// Consecutive rejections after which a level set is declared empty.
pub const MAX_REJECTIONS: u64 = 1_000_000;

/// Half-length of the `xi` window used on the equator, where the fiber is an
/// unbounded parabola.
const EQUATOR_XI_WINDOW: f64 = 10.0;

/// Draws `n` points of `Sigma_{C,h}`.
///
/// `(theta, phi)` is uniform on the sphere restricted to the permitted band
/// and rejected outside the image; `q` is uniform on the fiber's `q`-range and
/// the `p`-branch is chosen by a fair coin. Sample `i` uses stream `i` of a
/// ChaCha8 generator keyed by `seed`, so the output does not depend on the
/// execution strategy.
pub fn sample_level_set(
    pp: ParamPair,
    n: usize,
    seed: u64,
    tol: &Tolerances,
    exec: Execution,
) -> Result<Vec<SphericalPoint>> {
    if !(pp.c > 0.0) {
        return Err(Error::InvalidParameter(format!("C = {} must be > 0", pp.c)));
    }
    let (_, theta_max) = contact::permitted_theta_interval(pp.c, pp.h);
    let s_max = theta_max.sin();
    let results = par::map_indexed(n, exec, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        sample_one(pp, s_max, tol, &mut rng)
    });
    results.into_iter().collect()
}

fn sample_one(pp: ParamPair, s_max: f64, tol: &Tolerances, rng: &mut ChaCha8Rng) -> Result<SphericalPoint> {
    let c = pp.c;
    let rc = c.sqrt();
    for _ in 0..MAX_REJECTIONS {
        let theta = rng.gen_range(-s_max..=s_max).asin();
        let phi = rng.gen_range(0.0..TAU);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let u: f64 = rng.gen();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        // Radicand of the p-quadratic, as a polynomial a xi^2 + b xi + k.
        let a = -4.0 * c * st * st;
        let b = 4.0 * (c * st * ct * sp + 1.0);
        let k = c * ct * ct * cp * cp - 2.0 * c + 4.0 * pp.h;
        let xi = if theta == 0.0 {
            let lo = -k / b;
            lo + u * EQUATOR_XI_WINDOW
        } else {
            if admissible(theta, phi, pp) < 0.0 {
                continue;
            }
            let d = b * b - 4.0 * a * k;
            if d < 0.0 {
                continue;
            }
            let t = -0.5 * (b + b.signum() * d.sqrt());
            let (x1, x2) = if t == 0.0 { (-b / (2.0 * a), -b / (2.0 * a)) } else { (t / a, k / t) };
            let (xlo, xhi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            let (qlo, qhi) = (1f64.atan2(xhi), 1f64.atan2(xlo));
            let q = qlo + u * (qhi - qlo);
            q.cos() / q.sin()
        };
        let r = (a * xi * xi + b * xi + k).max(0.0);
        let p = 0.5 * (rc * ct * cp + sign * r.sqrt());
        let q = 1f64.atan2(xi);
        if !(q > 0.0 && q < PI) {
            continue;
        }
        let pt = SphericalPoint { q, p, theta, phi, c };
        let slack = tol.level_set.max(1e-13 * pt.hamiltonian_term_scale());
        if (pt.hamiltonian() - pp.h).abs() <= slack {
            return Ok(pt);
        }
    }
    Err(Error::EmptyLevelSet { rejections: MAX_REJECTIONS })
}
