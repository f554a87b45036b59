//! Subcommand implementations. Each returns the table it produced and the
//! exit status implied by its result.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use twobody_core::bifurcation::{self, Family};
use twobody_core::dynamics::{self, IntegratorOptions, Trajectory};
use twobody_core::level_sets::{self, TopologyClass};
use twobody_core::{contact, par, Error, Execution, ParamPair, ReducedState};

use crate::config::RunConfig;
use crate::output::{Cell, Table};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_EMPTY: u8 = 4;
pub const EXIT_BRACKET: u8 = 5;
pub const EXIT_BLOWUP: u8 = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DegenerateRoot { .. } => EXIT_DEGENERATE,
            Error::EmptyLevelSet { .. } => EXIT_EMPTY,
            Error::BracketFailure { .. } => EXIT_BRACKET,
            Error::Blowup { .. } => EXIT_BLOWUP,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

/// A table plus the exit status to report after it is written.
pub struct Output {
    pub table: Table,
    pub code: u8,
    pub single: bool,
}

fn finite(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::usage(format!("{name} = {v} must be finite")))
    }
}

pub fn classify(c: f64, h: f64, cfg: &RunConfig) -> Result<Output, Failure> {
    let pp = ParamPair { c: finite("C", c)?, h: finite("h", h)? };
    let tol = &cfg.tolerances;
    let topology = level_sets::classify_topology(pp, tol);
    let (holes, agree) = match topology {
        TopologyClass::S1xS2 | TopologyClass::ConnSum3S1xS2 => {
            let fast = level_sets::hole_count_fast(pp, tol)?;
            let oracle = level_sets::hole_count_oracle(pp, cfg.grid_theta, cfg.grid_phi, Execution::default())?;
            (Some(fast), Some(fast == oracle.holes))
        }
        _ => (None, None),
    };
    let mut table = Table::new(&["C", "h", "holes", "topology", "fast_oracle_agree"]);
    table.push(vec![c.into(), h.into(), holes.into(), topology.as_str().into(), agree.into()]);
    let code = match topology {
        TopologyClass::OnBifurcation => EXIT_DEGENERATE,
        TopologyClass::Empty => EXIT_EMPTY,
        _ => 0,
    };
    Ok(Output { table, code, single: true })
}

pub fn bifurcation(c_min: f64, c_max: f64, n: usize) -> Result<Output, Failure> {
    let d = bifurcation::trace_diagram(c_min, c_max, n, Execution::default())?;
    let mut table = Table::new(&["curve_id", "C", "h"]);
    for curve in &d.curves {
        for v in &curve.vertices {
            table.push(vec![curve.label.as_str().into(), v.c.into(), v.h.into()]);
        }
    }
    Ok(Output { table, code: 0, single: false })
}

/// Finite-difference step for the Lie-derivative residual.
const LIE_STEP: f64 = 1e-5;

pub fn contact_check(c: f64, h: f64, n: usize, cfg: &RunConfig) -> Result<Output, Failure> {
    if n == 0 {
        return Err(Failure::usage("n must be positive"));
    }
    if !(c > 0.0) {
        return Err(Failure::usage(format!("C = {c} must be > 0")));
    }
    let pp = ParamPair::new(c, finite("h", h)?)?;
    let exec = Execution::default();
    let tol = &cfg.tolerances;
    let (band_lo, band_hi) = contact::permitted_theta_interval(c, h);
    let pts = level_sets::sample_level_set(pp, n, cfg.seed, tol, exec)?;
    let per_point = par::map_slice(&pts, exec, |sp| {
        (contact::liouville_derivative(sp), contact::lie_derivative_residual_unchecked(sp, LIE_STEP))
    });
    let min_xh = per_point.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let lie_max = per_point.iter().map(|v| v.1).fold(0.0, f64::max);
    // Equator inputs use their own stream so they do not shift the samples.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let equator_min = (0..n)
        .map(|_| {
            contact::equator_transversality(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(1e-9..PI),
                rng.gen_range(0.0..TAU),
                c,
            )
        })
        .fold(f64::INFINITY, f64::min);
    let grid = contact::f_theta_grid_min(c, h, cfg.f_grid, exec);
    // No boundary latitude on the grid leaves F with nothing to certify.
    let f_ok = grid.min.is_none_or(|m| m > 0.0);
    let certified = min_xh > 0.0 && equator_min > 0.0 && f_ok && lie_max < tol.lie_derivative;
    let mut table = Table::new(&[
        "C",
        "h",
        "samples",
        "band_lo",
        "band_hi",
        "min_xh",
        "equator_min",
        "f_grid_min",
        "f_grid_argmin",
        "f_grid_evaluated",
        "lie_max_residual",
        "verdict",
    ]);
    table.push(vec![
        c.into(),
        h.into(),
        pts.len().into(),
        band_lo.into(),
        band_hi.into(),
        min_xh.into(),
        equator_min.into(),
        grid.min.into(),
        grid.argmin.into(),
        grid.evaluated.into(),
        lie_max.into(),
        if certified { "certified-on-sample" } else { "not-certified" }.into(),
    ]);
    Ok(Output { table, code: 0, single: true })
}

#[derive(Serialize)]
struct Sidecar {
    status: &'static str,
    t_final: f64,
    samples: usize,
    h0: f64,
    c0: f64,
    max_drift_h: f64,
    max_drift_c: f64,
    drift_report: [f64; 2],
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut table = Table::new(&["t", "xi", "p", "m1", "m2", "m3", "H", "C"]);
    for (t, s) in tr.times.iter().zip(&tr.states) {
        table.push(vec![
            Cell::Num(*t),
            s.xi.into(),
            s.p.into(),
            s.m1.into(),
            s.m2.into(),
            s.m3.into(),
            s.hamiltonian().into(),
            s.casimir().into(),
        ]);
    }
    table
}

/// Where the drift sidecar goes: the explicit path, else `<out>.drift.json`,
/// else stderr.
pub fn sidecar_path(explicit: Option<&Path>, out: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        out.map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".drift.json");
            PathBuf::from(s)
        })
    })
}

fn write_sidecar(tr: &Trajectory, status: &'static str, path: Option<&Path>) -> Result<(), Failure> {
    let (dh, dc) = dynamics::drift_report(tr);
    let sc = Sidecar {
        status,
        t_final: tr.last().map_or(0.0, |l| l.0),
        samples: tr.len(),
        h0: tr.h0,
        c0: tr.c0,
        max_drift_h: tr.max_drift_h,
        max_drift_c: tr.max_drift_c,
        drift_report: [dh, dc],
    };
    let line = serde_json::to_string(&sc).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    match path {
        Some(p) => std::fs::write(p, format!("{line}\n"))?,
        None => writeln!(std::io::stderr(), "{line}")?,
    }
    Ok(())
}

pub fn integrate(
    s0: ReducedState,
    t_end: f64,
    dt: f64,
    project_casimir: bool,
    sidecar: Option<&Path>,
) -> Result<Output, Failure> {
    match dynamics::integrate_with(s0, t_end, dt, IntegratorOptions { project_casimir }) {
        Ok(tr) => {
            write_sidecar(&tr, "ok", sidecar)?;
            Ok(Output { table: trajectory_table(&tr), code: 0, single: false })
        }
        Err(Error::Blowup { time, partial }) => {
            write_sidecar(&partial, "blowup", sidecar)?;
            eprintln!("blowup: last valid time {time}");
            Ok(Output { table: trajectory_table(&partial), code: EXIT_BLOWUP, single: false })
        }
        Err(e) => Err(e.into()),
    }
}

/// Bounds used to re-verify emitted level-set points.
const REVERIFY_H: f64 = 1e-8;
const REVERIFY_C: f64 = 1e-10;

pub fn sample(c: f64, h: f64, n: usize, cfg: &RunConfig) -> Result<Output, Failure> {
    if !(c > 0.0) {
        return Err(Failure::usage(format!("C = {c} must be > 0")));
    }
    let pp = ParamPair::new(c, finite("h", h)?)?;
    let pts = level_sets::sample_level_set(pp, n, cfg.seed, &cfg.tolerances, Execution::default())?;
    let mut table = Table::new(&["theta", "phi", "p", "q"]);
    for sp in &pts {
        let s = sp.to_reduced();
        let (dh, dc) = ((s.hamiltonian() - h).abs(), (s.casimir() - c).abs());
        if !(dh < REVERIFY_H && dc < REVERIFY_C) {
            return Err(Failure {
                code: EXIT_BRACKET,
                message: format!("sample {sp:?} fails re-verification: |H - h| = {dh:e}, |C - c| = {dc:e}"),
            });
        }
        table.push(vec![sp.theta.into(), sp.phi.into(), sp.p.into(), sp.q.into()]);
    }
    Ok(Output { table, code: 0, single: false })
}

pub fn equilibria(family: Family, lo: f64, hi: f64, n: usize, sign: f64) -> Result<Output, Failure> {
    if n == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Failure::usage(format!("need finite min <= max and n >= 1, got ({lo}, {hi}, {n})")));
    }
    let mut table = Table::new(&["param", "xi", "p", "m1", "m2", "m3", "C", "h", "field_norm"]);
    for k in 0..n {
        let param = if n == 1 { lo } else if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
        let e = match family {
            Family::Tan => bifurcation::equilibrium_tan_family(param, sign)?,
            Family::Equator => bifurcation::equilibrium_equator_family(param)?,
        };
        let s = e.state;
        let norm = s.hamiltonian_vector_field().iter().map(|v| v * v).sum::<f64>().sqrt();
        table.push(vec![
            param.into(),
            s.xi.into(),
            s.p.into(),
            s.m1.into(),
            s.m2.into(),
            s.m3.into(),
            s.casimir().into(),
            s.hamiltonian().into(),
            norm.into(),
        ]);
    }
    Ok(Output { table, code: 0, single: false })
}
