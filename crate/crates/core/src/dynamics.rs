//! Fixed-step RK4 integration of the reduced flow with drift monitoring.

use crate::error::{Error, Result};
use crate::model::{ReducedState, Vec5};
use crate::par::{self, Execution};

/// `|xi|` beyond which a run is treated as a collision or antipodal escape.
pub const BLOWUP_XI: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub h0: f64,
    pub c0: f64,
    pub max_drift_h: f64,
    pub max_drift_c: f64,
}

impl Trajectory {
    fn start(s0: ReducedState) -> Self {
        Trajectory {
            times: vec![0.0],
            states: vec![s0],
            h0: s0.hamiltonian(),
            c0: s0.casimir(),
            max_drift_h: 0.0,
            max_drift_c: 0.0,
        }
    }

    fn push(&mut self, t: f64, s: ReducedState) {
        self.max_drift_h = self.max_drift_h.max((s.hamiltonian() - self.h0).abs());
        self.max_drift_c = self.max_drift_c.max((s.casimir() - self.c0).abs());
        self.times.push(t);
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, ReducedState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// Recomputes both drift maxima from the stored states.
    pub fn recompute_drift(&mut self) {
        let (h0, c0) = (self.h0, self.c0);
        self.max_drift_h = self.states.iter().map(|s| (s.hamiltonian() - h0).abs()).fold(0.0, f64::max);
        self.max_drift_c = self.states.iter().map(|s| (s.casimir() - c0).abs()).fold(0.0, f64::max);
    }

    /// Lengths match and times increase strictly.
    pub fn is_valid(&self) -> bool {
        self.times.len() == self.states.len() && self.times.windows(2).all(|w| w[1] > w[0])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegratorOptions {
    /// Rescale `m` back onto the initial Casimir sphere after every step.
    pub project_casimir: bool,
}

fn axpy(a: &Vec5, k: f64, b: &Vec5) -> Vec5 {
    std::array::from_fn(|i| a[i] + k * b[i])
}

fn field(x: &Vec5) -> Vec5 {
    ReducedState::from_array(*x).hamiltonian_vector_field()
}

/// One classical Runge-Kutta step.
pub fn rk4_step(s: &ReducedState, dt: f64) -> ReducedState {
    let x = s.to_array();
    let k1 = field(&x);
    let k2 = field(&axpy(&x, 0.5 * dt, &k1));
    let k3 = field(&axpy(&x, 0.5 * dt, &k2));
    let k4 = field(&axpy(&x, dt, &k3));
    ReducedState::from_array(std::array::from_fn(|i| {
        x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

fn project(s: ReducedState, c0: f64) -> ReducedState {
    let c = s.casimir();
    if c > 0.0 && c0 > 0.0 {
        let k = (c0 / c).sqrt();
        ReducedState { m1: s.m1 * k, m2: s.m2 * k, m3: s.m3 * k, ..s }
    } else {
        s
    }
}

pub fn integrate(s0: ReducedState, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_with(s0, t_end, dt, IntegratorOptions::default())
}

/// Samples at `0, dt, 2 dt, ...` and at `t_end`, the last step clipped.
pub fn integrate_with(s0: ReducedState, t_end: f64, dt: f64, opts: IntegratorOptions) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end > 0.0 && dt <= t_end && dt.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidStep { dt, t_end });
    }
    if !s0.is_finite() {
        return Err(Error::InvalidParameter("initial state is not finite".into()));
    }
    let n_full = (t_end / dt + 1e-9).floor() as usize;
    let mut tr = Trajectory::start(s0);
    let mut s = s0;
    let step = |tr: &mut Trajectory, s: &mut ReducedState, t: f64, h: f64| -> Result<()> {
        let mut next = rk4_step(s, h);
        if opts.project_casimir {
            next = project(next, tr.c0);
        }
        if !next.is_finite() || next.xi.abs() > BLOWUP_XI {
            let time = *tr.times.last().unwrap_or(&0.0);
            return Err(Error::Blowup { time, partial: Box::new(tr.clone()) });
        }
        *s = next;
        tr.push(t, next);
        Ok(())
    };
    for k in 1..=n_full {
        let t = if k == n_full && (t_end - k as f64 * dt).abs() <= 1e-9 * dt { t_end } else { k as f64 * dt };
        step(&mut tr, &mut s, t, dt)?;
    }
    let t_last = *tr.times.last().unwrap_or(&0.0);
    if t_end - t_last > 1e-9 * dt {
        step(&mut tr, &mut s, t_end, t_end - t_last)?;
    }
    Ok(tr)
}

/// Integrates each initial state independently.
pub fn integrate_batch(states: &[ReducedState], t_end: f64, dt: f64, exec: Execution) -> Vec<Result<Trajectory>> {
    par::map_slice(states, exec, |s| integrate(*s, t_end, dt))
}

/// `(max |H - h0| / max(1, |h0|), max |C - c0| / max(1, |c0|))`,
/// recomputed from the stored states.
pub fn drift_report(tr: &Trajectory) -> (f64, f64) {
    let mut t = tr.clone();
    t.recompute_drift();
    (t.max_drift_h / tr.h0.abs().max(1.0), t.max_drift_c / tr.c0.abs().max(1.0))
}
