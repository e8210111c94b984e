//! Fixed-step integration of the delayed Cucker–Smale system
//!
//! ```text
//! ẋᵢ = vᵢ,
//! v̇ᵢ = (λ/N) Σⱼ ∫ ψ(|xᵢ(t-s) - xⱼ(t-s)|) (vⱼ(t-s) - vᵢ(t-s)) dP(s),
//! ```
//!
//! with constant data on `(-∞, 0]`, plus the diagnostics `V`, `D`, `d_X`,
//! momentum and the Lyapunov functional `L`, and checkers for the estimates
//! they are supposed to satisfy.

mod diagnostics;
mod history;
mod init;
mod integrator;
mod verify;

pub use diagnostics::{diagnostics_at, DiagnosticsRow, DiagnosticsSeries};
pub use history::History;
pub use init::random_initial;
pub use integrator::{accelerations, run};
pub use verify::{fit_decay_rate, verify_estimates, Violation, ViolationKind, ViolationReport};

use serde::Serialize;

use crate::comm_kernel::CommunicationRate;
use crate::delay_dist::{DelayDistribution, Quadrature, DEFAULT_QUAD_ORDER, DEFAULT_TAIL_MASS_TOL};
use crate::error::SimError;

/// Positions and velocities of `n` agents in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwarmState {
    pub t: f64,
    pub n: usize,
    pub d: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl SwarmState {
    pub fn new(t: f64, n: usize, d: usize, x: Vec<f64>, v: Vec<f64>) -> Result<Self, SimError> {
        let s = Self { t, n, d, x, v };
        s.check()?;
        Ok(s)
    }

    /// Builds a state at `t = 0` from per-agent rows.
    pub fn from_rows(x: &[Vec<f64>], v: &[Vec<f64>]) -> Result<Self, SimError> {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        if v.len() != n || x.iter().chain(v).any(|r| r.len() != d) {
            return Err(SimError::ConfigInvalid("ragged position/velocity rows".into()));
        }
        Self::new(0.0, n, d, x.concat(), v.concat())
    }

    fn check(&self) -> Result<(), SimError> {
        if self.n < 2 || self.d < 1 {
            return Err(SimError::ConfigInvalid(format!(
                "need at least 2 agents in at least 1 dimension, got N = {}, d = {}",
                self.n, self.d
            )));
        }
        if self.x.len() != self.n * self.d || self.v.len() != self.n * self.d {
            return Err(SimError::ConfigInvalid("state arrays do not match N x d".into()));
        }
        if self.x.iter().chain(&self.v).any(|c| !c.is_finite()) {
            return Err(SimError::ConfigInvalid("non-finite initial state".into()));
        }
        Ok(())
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.v[i * self.d..(i + 1) * self.d]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub lambda: f64,
    pub rate: CommunicationRate,
    pub dist: DelayDistribution,
    pub dt: f64,
    pub t_end: f64,
    pub quad_order: usize,
    pub tail_mass_tol: f64,
    /// Seed of the initial-condition generator, kept for provenance of a run.
    pub seed: u64,
    pub diag_stride: usize,
}

impl SimConfig {
    /// Defaults: `dt = min(1e-2, s_max/40)` (or `1e-2` without delay),
    /// order-32 quadrature, tail mass `1e-12`, every step sampled.
    pub fn new(lambda: f64, rate: CommunicationRate, dist: DelayDistribution, t_end: f64) -> Self {
        let horizon = dist.truncation_horizon(DEFAULT_TAIL_MASS_TOL);
        Self {
            lambda,
            rate,
            dist,
            dt: default_dt(horizon),
            t_end,
            quad_order: DEFAULT_QUAD_ORDER,
            tail_mass_tol: DEFAULT_TAIL_MASS_TOL,
            seed: 0,
            diag_stride: 1,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.dist.truncation_horizon(self.tail_mass_tol)
    }

    /// Number of steps; the run ends at `steps() · dt`, the first grid time
    /// not before `t_end` (up to rounding).
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::ConfigInvalid(m));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.dt <= self.t_end) {
            return bad(format!("need dt <= t_end, got dt = {}, t_end = {}", self.dt, self.t_end));
        }
        if self.diag_stride == 0 {
            return bad("diag_stride must be at least 1".into());
        }
        self.dist.validated()?;
        let horizon = self.horizon();
        if horizon > 0.0 && self.dt > horizon / 4.0 {
            return bad(format!("dt = {} does not resolve the delay horizon {horizon} (need dt <= horizon/4)", self.dt));
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Result<Quadrature, SimError> {
        Ok(self.dist.quadrature(self.quad_order, self.tail_mass_tol)?)
    }
}

pub fn default_dt(horizon: f64) -> f64 {
    if horizon > 0.0 {
        (horizon / 40.0).min(1e-2)
    } else {
        1e-2
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub history: History,
    pub diagnostics: DiagnosticsSeries,
}

/// `V = ½ Σᵢ Σⱼ |vᵢ - vⱼ|²`.
pub fn velocity_fluctuation(n: usize, d: usize, v: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += dist_sq(&v[i * d..(i + 1) * d], &v[j * d..(j + 1) * d]);
        }
    }
    total
}

/// `max |xᵢ - xⱼ|`.
pub fn position_diameter(n: usize, d: usize, x: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max(dist_sq(&x[i * d..(i + 1) * d], &x[j * d..(j + 1) * d]));
        }
    }
    best.sqrt()
}

pub fn momentum(n: usize, d: usize, v: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; d];
    for i in 0..n {
        for (mk, vk) in m.iter_mut().zip(&v[i * d..(i + 1) * d]) {
            *mk += vk;
        }
    }
    m
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `D` of a constant datum: the delay integral collapses to
/// `Σ_{i<j} ψ(|xᵢ - xⱼ|) |vᵢ - vⱼ|²`.
pub fn constant_datum_dissipation(state: &SwarmState, rate: &CommunicationRate) -> f64 {
    let n = state.n;
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let r2 = dist_sq(state.position(i), state.position(j));
            total += rate.psi_sq(r2) * dist_sq(state.velocity(i), state.velocity(j));
        }
    }
    total
}
