use serde::Serialize;

use super::integrator::Kernel;
use super::{momentum, position_diameter, velocity_fluctuation, History, SimConfig, SwarmState};
use crate::delay_dist::Quadrature;
use crate::error::SimError;
use crate::flocking_conditions::delay_coefficient;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// `½ Σᵢⱼ |vᵢ - vⱼ|²`.
    pub v: f64,
    /// `½ Σᵢⱼ ∫ ψᵢⱼ(t-s) |vⱼ(t-s) - vᵢ(t-s)|² dP(s)`.
    pub d: f64,
    /// Position diameter.
    pub dx: f64,
    /// Lyapunov functional.
    pub l: f64,
    pub momentum: Vec<f64>,
    /// `ψ(d_X(0) + √(2L(0)) t)`, a lower bound for the minimal interaction.
    pub phi_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsSeries {
    pub dim: usize,
    /// `L(0) = V(0) + (2λ²M₃/√M₂) D(0)` of the run's datum.
    pub l_zero: f64,
    pub d_x0: f64,
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsSeries {
    pub(crate) fn empty(dim: usize) -> Self {
        Self { dim, l_zero: 0.0, d_x0: 0.0, rows: Vec::new() }
    }

    pub(crate) fn start(dim: usize, config: &SimConfig, initial: &SwarmState, d0: f64, d_x0: f64) -> Self {
        let v0 = velocity_fluctuation(initial.n, initial.d, &initial.v);
        let l_zero = v0 + delay_coefficient(&config.dist, config.lambda) * d0;
        Self { dim, l_zero, d_x0, rows: Vec::new() }
    }

    /// Row at grid point `k`, given `D` at every grid point up to `k`.
    pub(crate) fn row(
        &self,
        config: &SimConfig,
        hist: &History,
        k: usize,
        d_samples: &[f64],
        weights: &LyapunovWeights,
    ) -> DiagnosticsRow {
        let (n, d) = (hist.agents(), hist.dim());
        let t = hist.time(k);
        let v = velocity_fluctuation(n, d, hist.velocities(k));
        DiagnosticsRow {
            t,
            v,
            d: d_samples[k],
            dx: position_diameter(n, d, hist.positions(k)),
            l: v + weights.delay_term(d_samples, k),
            momentum: momentum(n, d, hist.velocities(k)),
            phi_lower: config.rate.psi_sq((self.d_x0 + (2.0 * self.l_zero).sqrt() * t).powi(2)),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// CSV header `t,V,D,dX,L,mom_1..mom_d,phi_lower`.
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["t", "V", "D", "dX", "L"].iter().map(|s| s.to_string()).collect();
        h.extend((1..=self.dim).map(|k| format!("mom_{k}")));
        h.push("phi_lower".into());
        h
    }
}

impl DiagnosticsRow {
    /// Values in header order.
    pub fn values(&self) -> Vec<f64> {
        let mut out = vec![self.t, self.v, self.d, self.dx, self.l];
        out.extend_from_slice(&self.momentum);
        out.push(self.phi_lower);
        out
    }
}

/// Trapezoid weights for the delay part of `L`:
///
/// ```text
/// L(t) - V(t) = (2λ²/√M₂) ∫ s ∫_{t-s}^t ∫_θ^t D dσ dθ dP(s)
///             = (2λ²/√M₂) ∫₀^∞ G(u) D(t - u) du,
/// G(u) = ∫ s (s - u)⁺ dP(s),
/// ```
///
/// with `G` taken from the quadrature and `u` on the integration grid.
pub(crate) struct LyapunovWeights {
    coef: f64,
    g: Vec<f64>,
    dt: f64,
}

impl LyapunovWeights {
    pub(crate) fn new(config: &SimConfig, quad: &Quadrature, dt: f64) -> Self {
        let m2 = config.dist.moment(2);
        let coef = if m2 > 0.0 { 2.0 * config.lambda * config.lambda / m2.sqrt() } else { 0.0 };
        let s_max = quad.nodes.iter().copied().fold(0.0, f64::max);
        let count = if coef > 0.0 { (s_max / dt).ceil() as usize + 1 } else { 0 };
        let g = (0..count)
            .map(|k| {
                let u = k as f64 * dt;
                quad.iter().map(|(s, w)| w * s * (s - u).max(0.0)).sum()
            })
            .collect();
        Self { coef, g, dt }
    }

    /// Delay part of `L` at grid point `k`; `D` before 0 is `D(0)`.
    pub(crate) fn delay_term(&self, d_samples: &[f64], k: usize) -> f64 {
        if self.g.is_empty() {
            return 0.0;
        }
        let last = self.g.len() - 1;
        let sum: f64 = self
            .g
            .iter()
            .enumerate()
            .map(|(j, &g)| {
                let weight = if j == 0 || j == last { 0.5 } else { 1.0 };
                weight * g * d_samples[k.saturating_sub(j)]
            })
            .sum();
        self.coef * self.dt * sum
    }
}

/// One diagnostics row at a grid time of a finished run, recomputing `D` on
/// the grid from the stored trajectory.
pub fn diagnostics_at(history: &History, t: f64, config: &SimConfig) -> Result<DiagnosticsRow, SimError> {
    let dt = history.dt();
    let k = (t / dt).round();
    if !(k >= 0.0 && (k * dt - t).abs() <= 1e-9 * dt.max(t.abs()) && (k as usize) < history.len()) {
        return Err(SimError::HistoryUnderflow { t });
    }
    let k = k as usize;
    let mut kernel = Kernel::new(config, history.agents(), history.dim())?;
    let weights = LyapunovWeights::new(config, kernel.quadrature(), dt);
    let reach = weights.g.len();
    let mut acc = vec![0.0; history.width()];
    let mut d_samples = vec![0.0; k + 1];
    let first = k.saturating_sub(reach);
    for j in std::iter::once(0).chain(first.max(1)..=k) {
        d_samples[j] = kernel.eval(history, history.time(j), None, &mut acc)?;
    }
    let d0 = d_samples[0];
    let initial = history.pre_history();
    let d_x0 = position_diameter(initial.n, initial.d, &initial.x);
    let series = DiagnosticsSeries::start(history.dim(), config, &initial, d0, d_x0);
    Ok(series.row(config, history, k, &d_samples, &weights))
}
