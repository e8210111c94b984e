use std::fmt;

use serde::Serialize;

use super::{DiagnosticsSeries, SimConfig};
use crate::error::SimError;

/// Relative slack on the forward–backward and Lyapunov inequalities.
const REL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `e^{-κs} D(t) ≤ D(t-s) ≤ e^{κs} D(t)`.
    ForwardBackward,
    /// `L(t) ≤ L(0)`.
    Lyapunov,
    /// `d_X(t) ≤ d_X(0) + √(2L(0)) t`.
    Diameter,
    /// `V(t) ≤ V(0) exp(-ω ∫₀ᵗ ψ(d_X(0) + √(2L(0)) σ) dσ)`.
    Decay,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ForwardBackward => "forward_backward",
            Self::Lyapunov => "lyapunov",
            Self::Diameter => "diameter",
            Self::Decay => "decay",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: f64,
    /// Delay node, for the forward–backward check.
    pub s: Option<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Checks the sampled series against the estimates implied by the moment
/// conditions at rate `kappa`, with `run_l_zero` as `L(0)`.
///
/// `D` between samples is interpolated linearly and equals `D(0)` before 0.
/// The `ψ`-integral of the decay bound uses the trapezoid rule on the sample
/// times.
pub fn verify_estimates(
    series: &DiagnosticsSeries,
    kappa: f64,
    config: &SimConfig,
    run_l_zero: f64,
) -> ViolationReport {
    let mut out = Vec::new();
    let rows = &series.rows;
    let Some(first) = rows.first() else {
        return ViolationReport::default();
    };
    let nodes: Vec<f64> = config.quadrature().map(|q| q.nodes).unwrap_or_default();
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let d_at = |tau: f64| -> f64 {
        if tau <= times[0] {
            return first.d;
        }
        let k = times.partition_point(|&t| t <= tau);
        if k >= times.len() {
            return rows[rows.len() - 1].d;
        }
        let (t0, t1) = (times[k - 1], times[k]);
        let th = (tau - t0) / (t1 - t0);
        rows[k - 1].d + th * (rows[k].d - rows[k - 1].d)
    };

    for r in rows {
        let slack = REL_SLACK * r.d;
        for &s in nodes.iter().filter(|&&s| s > 0.0) {
            let past = d_at(r.t - s);
            let lower = (-kappa * s).exp() * r.d;
            let upper = (kappa * s).exp() * r.d;
            if past < lower - slack {
                out.push(Violation { kind: ViolationKind::ForwardBackward, t: r.t, s: Some(s), value: past, bound: lower });
            } else if past > upper + slack {
                out.push(Violation { kind: ViolationKind::ForwardBackward, t: r.t, s: Some(s), value: past, bound: upper });
            }
        }
    }

    let l_cap = run_l_zero * (1.0 + REL_SLACK);
    let growth = (2.0 * run_l_zero).sqrt();
    for r in rows {
        if r.l > l_cap {
            out.push(Violation { kind: ViolationKind::Lyapunov, t: r.t, s: None, value: r.l, bound: run_l_zero });
        }
        let dx_cap = series.d_x0 + growth * r.t;
        if r.dx > dx_cap + 1e-9 {
            out.push(Violation { kind: ViolationKind::Diameter, t: r.t, s: None, value: r.dx, bound: dx_cap });
        }
    }

    if let Ok(k) = config.dist.k_moment(kappa) {
        let lambda = config.lambda;
        let omega = 2.0 * lambda * (1.0 - 2.0 * lambda * k.sqrt());
        let v0 = first.v;
        let psi_at = |t: f64| config.rate.psi_sq((series.d_x0 + growth * t).powi(2));
        let mut integral = 0.0;
        let mut prev = (first.t, psi_at(first.t));
        for r in rows {
            let cur = psi_at(r.t);
            integral += 0.5 * (r.t - prev.0) * (prev.1 + cur);
            prev = (r.t, cur);
            let bound = v0 * (-omega * integral).exp();
            if r.v > bound + REL_SLACK * v0 {
                out.push(Violation { kind: ViolationKind::Decay, t: r.t, s: None, value: r.v, bound });
            }
        }
    }
    ViolationReport { violations: out }
}

/// Least-squares slope of `-ln V` against `t` over samples in `[t_a, t_b]`.
pub fn fit_decay_rate(series: &DiagnosticsSeries, window: (f64, f64)) -> Result<f64, SimError> {
    let (t_a, t_b) = window;
    let pts: Vec<(f64, f64)> =
        series.rows.iter().filter(|r| r.t >= t_a && r.t <= t_b).map(|r| (r.t, r.v)).collect();
    if pts.len() < 8 {
        return Err(SimError::DegenerateWindow(format!(
            "{} samples in [{t_a}, {t_b}], need at least 8",
            pts.len()
        )));
    }
    if let Some(&(t, _)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(SimError::DegenerateWindow(format!("V vanishes at t = {t}")));
    }
    let m = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let y_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in &pts {
        sxy += (t - t_mean) * (v.ln() - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(-sxy / sxx)
}
