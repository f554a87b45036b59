//! The bifurcation locus `gamma` in the `(C, h)` plane.
//!
//! `gamma` is where the boundary quartic in `y = m3^2` acquires a multiple
//! root. It has two branches: the tangent ray `h = C/2, C >= 2` and a main
//! curve given implicitly through `u = C - 4h` and
//! `s = sqrt(u^2 + 12) - u`. Both coincide with the images of the two
//! families of relative equilibria.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::model::{xi_of_q, ParamPair, ReducedState};
use crate::par::{self, Execution};
use crate::roots::{self, cauchy_bound};

/// Quartic in `y = m3^2`, descending powers.
pub fn quartic_coeffs(pp: ParamPair) -> [f64; 5] {
    let ParamPair { c, h } = pp;
    [
        0.25,
        0.5 * c - 2.0 * h,
        0.25 * c * c - 2.0 * c * h + 4.0 * h * h + 0.5,
        2.0 * h - 1.5 * c,
        0.25,
    ]
}

/// `(y coefficient, constant)` of the remainder of the quartic modulo
/// `(y - y0)^2`, scaled by 4 so that every coefficient is an integer
/// polynomial in `(C, h, y0)`.
pub fn remainder_linear_coeffs(pp: ParamPair, y0: f64) -> (f64, f64) {
    let ParamPair { c, h } = pp;
    let y2 = y0 * y0;
    let lin = 2.0 * c * c * y0 - 16.0 * c * h * y0 + 6.0 * c * y2 - 6.0 * c + 32.0 * h * h * y0
        - 24.0 * h * y2
        + 8.0 * h
        + 4.0 * y2 * y0
        + 4.0 * y0;
    let cst = -c * c * y2 + 8.0 * c * h * y2 - 4.0 * c * y2 * y0 - 16.0 * h * h * y2 + 16.0 * h * y2 * y0
        - 3.0 * y2 * y2
        - 2.0 * y2
        + 1.0;
    (lin, cst)
}

/// `s = sqrt(u^2 + 12) - u`, without cancellation for large positive `u`.
pub fn radical_s(u: f64) -> f64 {
    let r = (u * u + 12.0).sqrt();
    if u > 0.0 {
        12.0 / (r + u)
    } else {
        r - u
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalRoot {
    /// NaN when the root does not exist.
    pub value: f64,
    pub exists: bool,
    pub positive: bool,
}

impl CriticalRoot {
    fn new(value: f64) -> Self {
        CriticalRoot { value, exists: true, positive: value > 0.0 }
    }

    fn missing() -> Self {
        CriticalRoot { value: f64::NAN, exists: false, positive: false }
    }
}

/// The four zeros in `y0` of the remainder's constant term:
/// `3 y0^2 + u y0 - 1 = 0` (always two real roots of opposite sign) and
/// `y0^2 + u y0 + 1 = 0` (real iff `u^2 >= 4`).
pub fn critical_roots(pp: ParamPair) -> [CriticalRoot; 4] {
    let u = pp.c - 4.0 * pp.h;
    let s = radical_s(u);
    let first = CriticalRoot::new(-2.0 / s);
    let second = CriticalRoot::new(s / 6.0);
    let disc = u * u - 4.0;
    if disc < 0.0 {
        return [first, second, CriticalRoot::missing(), CriticalRoot::missing()];
    }
    let r = disc.sqrt();
    // Product of the pair is 1.
    let big = if u <= 0.0 { 0.5 * (-u + r) } else { 0.5 * (-u - r) };
    let small = if big == 0.0 { 0.0 } else { 1.0 / big };
    let (third, fourth) = if u <= 0.0 { (big, small) } else { (small, big) };
    [first, second, CriticalRoot::new(third), CriticalRoot::new(fourth)]
}

/// Terms of the main implicit equation; their sum vanishes on the main branch.
pub fn main_curve_terms(pp: ParamPair) -> [f64; 5] {
    let ParamPair { c, h } = pp;
    let u = c - 4.0 * h;
    let s = radical_s(u);
    [s * s * s / 54.0, u * s * s / 6.0, (u * u + 2.0) * s / 3.0, -6.0 * c, 8.0 * h]
}

pub fn main_curve_residual(pp: ParamPair) -> f64 {
    main_curve_terms(pp).iter().sum()
}

/// `|residual| / sum |terms|`.
pub fn main_curve_relative_residual(pp: ParamPair) -> f64 {
    let t = main_curve_terms(pp);
    let scale: f64 = t.iter().map(|v| v.abs()).sum();
    t.iter().sum::<f64>().abs() / scale
}

pub fn tangent_residual(pp: ParamPair) -> f64 {
    if pp.c >= 2.0 {
        (pp.h - 0.5 * pp.c).abs()
    } else {
        f64::INFINITY
    }
}

pub fn implicit_curve_residual(pp: ParamPair) -> f64 {
    main_curve_residual(pp).abs().min(tangent_residual(pp))
}

pub fn is_on_bifurcation(pp: ParamPair, tol: f64) -> bool {
    implicit_curve_residual(pp) < tol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Parametrized by `q`; `m3 = +-sqrt(tan(q/2))`.
    Tan,
    /// Parametrized by `m3` at `q = pi/2`.
    Equator,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Tan => "tan",
            Family::Equator => "equator",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumPoint {
    pub state: ReducedState,
    pub family: Family,
    pub parameter: f64,
}

pub fn equilibrium_tan_family(q: f64, sign: f64) -> Result<EquilibriumPoint> {
    let xi = xi_of_q(q)?;
    let t = (0.5 * q).tan();
    let sg = if sign < 0.0 { -1.0 } else { 1.0 };
    let state = ReducedState::new(xi, 0.0, 0.0, -sg * t.powf(1.5), sg * t.sqrt());
    Ok(EquilibriumPoint { state, family: Family::Tan, parameter: q })
}

pub fn equilibrium_equator_family(m3: f64) -> Result<EquilibriumPoint> {
    if m3 == 0.0 || !m3.is_finite() {
        return Err(Error::InvalidParameter(format!("m3 = {m3} must be finite and non-zero")));
    }
    let state = ReducedState::new(0.0, 0.0, 0.0, -1.0 / m3, m3);
    Ok(EquilibriumPoint { state, family: Family::Equator, parameter: m3 })
}

pub fn equilibrium(family: Family, parameter: f64) -> Result<EquilibriumPoint> {
    match family {
        Family::Tan => equilibrium_tan_family(parameter, 1.0),
        Family::Equator => equilibrium_equator_family(parameter),
    }
}

/// The `(C, h)` image of an equilibrium family member.
pub fn curve_from_equilibria(family: Family, parameter: f64) -> Result<ParamPair> {
    match family {
        Family::Tan => {
            let q = parameter;
            let cot = xi_of_q(q)?;
            let t = (0.5 * q).tan();
            let c = t * t * t + t;
            Ok(ParamPair { c, h: 0.5 * c + cot * (t * t + t * cot - 1.0) })
        }
        Family::Equator => {
            let m3 = parameter;
            if m3 == 0.0 || !m3.is_finite() {
                return Err(Error::InvalidParameter(format!("m3 = {m3} must be finite and non-zero")));
            }
            let c = m3 * m3 + 1.0 / (m3 * m3);
            Ok(ParamPair { c, h: 0.5 * c })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoincidenceReport {
    /// Max of `|main residual| / sum |terms|` over the tan-family grid.
    pub tan_max_relative: f64,
    /// Max absolute main residual over the same grid.
    pub tan_max_absolute: f64,
    /// Max `|h - C/2|` over the equator family, `m3` in `[1, 10]`.
    pub equator_max: f64,
    /// Min `C` over the equator grid.
    pub equator_min_c: f64,
}

impl CoincidenceReport {
    pub fn residual(&self) -> f64 {
        self.tan_max_relative.max(self.equator_max)
    }
}

/// Evaluates the main implicit equation on the tan family at
/// `q_i = pi i / (n + 1)` and `h - C/2` on the equator family.
///
/// Near `q = pi` the family reaches `C ~ 1e8` where the individual terms of
/// the main equation are `~1e25`, so the tan-family residual is measured
/// relative to the sum of term magnitudes.
pub fn verify_coincidence(n: usize, exec: Execution) -> Result<CoincidenceReport> {
    if n < 10 {
        return Err(Error::InvalidParameter(format!("n = {n} must be >= 10")));
    }
    let tan = par::map_indexed(n, exec, |i| {
        let q = PI * (i + 1) as f64 / (n + 1) as f64;
        curve_from_equilibria(Family::Tan, q).map(|pp| {
            (main_curve_relative_residual(pp), main_curve_residual(pp).abs())
        })
    });
    let mut rel = 0.0f64;
    let mut abs = 0.0f64;
    for r in tan {
        let (a, b) = r?;
        rel = rel.max(a);
        abs = abs.max(b);
    }
    let mut eq_max = 0.0f64;
    let mut eq_min_c = f64::INFINITY;
    for i in 0..n {
        let m3 = 1.0 + 9.0 * i as f64 / (n - 1) as f64;
        let pp = curve_from_equilibria(Family::Equator, m3)?;
        eq_max = eq_max.max((pp.h - 0.5 * pp.c).abs());
        eq_min_c = eq_min_c.min(pp.c);
    }
    Ok(CoincidenceReport { tan_max_relative: rel, tan_max_absolute: abs, equator_max: eq_max, equator_min_c: eq_min_c })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveLabel {
    Main,
    Tangent,
}

impl CurveLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveLabel::Main => "main",
            CurveLabel::Tangent => "tangent",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: CurveLabel,
    pub vertices: Vec<ParamPair>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BifurcationDiagram {
    pub curves: Vec<Curve>,
}

impl BifurcationDiagram {
    pub fn curve(&self, label: CurveLabel) -> Option<&Curve> {
        self.curves.iter().find(|c| c.label == label)
    }

    /// The same vertices in `(C^2, h)` coordinates.
    pub fn squared_view(&self) -> Vec<(CurveLabel, Vec<(f64, f64)>)> {
        self.curves
            .iter()
            .map(|c| (c.label, c.vertices.iter().map(|v| (v.c * v.c, v.h)).collect()))
            .collect()
    }
}

/// Left side of the main equation as a function of `u = C - 4h` alone, minus
/// `4C`: strictly decreasing in `u`, from `+inf` to `0`.
fn main_in_u(u: f64) -> f64 {
    let s = radical_s(u);
    s * s * s / 54.0 + u * s * s / 6.0 + (u * u + 2.0) * s / 3.0 - 2.0 * u
}

/// Solves the main equation for `h` at fixed `C > 0`.
pub fn main_branch_h(c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::BracketFailure { c });
    }
    let target = 4.0 * c;
    let g = |u: f64| main_in_u(u) - target;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut k = 0;
    while g(lo) <= 0.0 {
        lo *= 2.0;
        k += 1;
        if k > 80 {
            return Err(Error::BracketFailure { c });
        }
    }
    k = 0;
    while g(hi) >= 0.0 {
        hi *= 2.0;
        k += 1;
        if k > 80 {
            return Err(Error::BracketFailure { c });
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    Ok(0.25 * (c - u))
}

/// Vertex acceptance: absolute residual below `1e-8`, or below the rounding
/// floor of the terms when they are large.
fn vertex_ok(pp: ParamPair) -> bool {
    let t = main_curve_terms(pp);
    let scale: f64 = t.iter().map(|v| v.abs()).sum();
    let r = t.iter().sum::<f64>().abs();
    r < 1e-8 || r < 1e-14 * scale
}

/// Samples both branches on `n` equally spaced values of `C`.
pub fn trace_diagram(c_min: f64, c_max: f64, n: usize, exec: Execution) -> Result<BifurcationDiagram> {
    if !(c_min > 0.0 && c_min < c_max && c_max.is_finite()) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < c_min < c_max and n >= 2, got ({c_min}, {c_max}, {n})"
        )));
    }
    let cs: Vec<f64> = (0..n)
        .map(|k| if k == n - 1 { c_max } else { c_min + (c_max - c_min) * k as f64 / (n - 1) as f64 })
        .collect();
    let main = par::map_slice(&cs, exec, |&c| {
        let h = main_branch_h(c)?;
        let pp = ParamPair { c, h };
        if !vertex_ok(pp) {
            return Err(Error::BracketFailure { c });
        }
        Ok(pp)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let tangent = cs.iter().filter(|&&c| c >= 2.0).map(|&c| ParamPair { c, h: 0.5 * c }).collect();
    Ok(BifurcationDiagram {
        curves: vec![
            Curve { label: CurveLabel::Main, vertices: main },
            Curve { label: CurveLabel::Tangent, vertices: tangent },
        ],
    })
}

fn tan_curve_point(t: f64) -> (f64, f64) {
    let c = t * t * t + t;
    let w = t * t - 1.0;
    (c, 0.5 * c - w * w / (4.0 * t))
}

/// Euclidean distance from `pp` to `gamma` in the `(C, h)` plane, using the
/// tan-family parametrization `C = t^3 + t`, `h = C/2 - (t^2 - 1)^2 / (4t)`
/// with `t = tan(q/2)` for the main branch.
pub fn distance_to_locus(pp: ParamPair) -> f64 {
    let ParamPair { c, h } = pp;
    let ray = if c >= 2.0 {
        (h - 0.5 * c).abs() / 1.25f64.sqrt()
    } else {
        // Closest point is either the ray's endpoint or its projection.
        let s = ((c - 2.0) + 0.5 * (h - 1.0)) / 1.25;
        let s = s.max(0.0);
        ((c - 2.0 - s).powi(2) + (h - 1.0 - 0.5 * s).powi(2)).sqrt()
    };
    let d2 = |ln_t: f64| {
        let (cc, hh) = tan_curve_point(ln_t.exp());
        (cc - c).powi(2) + (hh - h).powi(2)
    };
    let (lo, hi, m) = (-16.0f64, 8.0f64, 4800);
    let step = (hi - lo) / m as f64;
    let mut best = lo;
    let mut best_v = f64::INFINITY;
    for k in 0..=m {
        let x = lo + step * k as f64;
        let v = d2(x);
        if v < best_v {
            best_v = v;
            best = x;
        }
    }
    // Golden-section refinement on the bracketing cell pair.
    let (mut a, mut b) = (best - step, best + step);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let (mut f1, mut f2) = (d2(x1), d2(x2));
    for _ in 0..100 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = d2(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = d2(x2);
        }
    }
    ray.min(best_v.min(f1).min(f2).sqrt())
}

/// Smallest scaled quartic value at a critical point on `y > 0`; zero when
/// the quartic has a multiple positive root.
pub fn multiple_root_gap(pp: ParamPair) -> Result<f64> {
    let q = quartic_coeffs(pp);
    let hi = cauchy_bound(&q);
    Ok(roots::min_critical_value(&q, 0.0, hi)?.map_or(f64::INFINITY, |(_, v)| v))
}

/// The four candidate roots for `(C, h) = (2, 1)` collapse to `y = 1`.
pub const SEPARATION_POINT: ParamPair = ParamPair { c: 2.0, h: 1.0 };

/// `q` of the tan-family member coinciding with the equator family at
/// `m3 = 1`.
pub const TAN_EQUATOR_MEETING_Q: f64 = FRAC_PI_2;
