//! Moment-based flocking conditions.
//!
//! For coupling `λ`, delay measure `P` and log-derivative constant `α` the
//! certificate consists of
//!
//! * `2λ√M₂ ≤ 1`,
//! * `2λ√K[κ] < 1`,
//! * `4λ√Mexp[κ] + α√(2L(0)) < κ`,
//!
//! for some `κ > 0`. When they hold, the velocity fluctuation decays at least
//! like `exp(-ω ∫ ψ)` with `ω = 2λ(1 - 2λ√K[κ])`.

mod curves;
mod threshold;

pub use curves::{critical_curve, linear_constraint, max_uniform_length, CurveFamily, CurveTable};
pub use threshold::{
    critical_v0_exponential_paper, critical_v0_numeric, exponential_feasibility_boundary, Threshold,
    EXP_LAMBDA_MU_MAX,
};

use serde::Serialize;

use crate::delay_dist::DelayDistribution;
use crate::error::ConditionError;
use crate::numerics::{bisect_last_true, golden_section_max};

/// Absolute tolerance on κ for the margin maximization.
pub const KAPPA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionInput {
    pub lambda: f64,
    pub dist: DelayDistribution,
    pub alpha: f64,
    /// Initial velocity fluctuation `V(0)`.
    pub v0: f64,
    /// Initial dissipation `D(0)`, when known.
    pub d0: Option<f64>,
    /// Bound `L(0)` through `D(0) ≤ V(0)` instead of the measured `D(0)`.
    pub use_weak_form: bool,
}

impl ConditionInput {
    pub fn new(lambda: f64, dist: DelayDistribution, alpha: f64, v0: f64) -> Result<Self, ConditionError> {
        Self { lambda, dist, alpha, v0, d0: None, use_weak_form: true }.validated()
    }

    pub fn with_d0(mut self, d0: f64) -> Result<Self, ConditionError> {
        self.d0 = Some(d0);
        self.use_weak_form = false;
        self.validated()
    }

    pub fn validated(self) -> Result<Self, ConditionError> {
        let bad = |m: String| Err(ConditionError::InvalidInput(m));
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        if !(self.v0.is_finite() && self.v0 >= 0.0) {
            return bad(format!("V(0) must be nonnegative, got {}", self.v0));
        }
        if let Some(d0) = self.d0 {
            if !(d0.is_finite() && d0 >= 0.0) {
                return bad(format!("D(0) must be nonnegative, got {d0}"));
            }
            // ψ ≤ 1 and the constant datum give D(0) ≤ V(0)
            if d0 > self.v0 * (1.0 + 1e-12) {
                return bad(format!("D(0) = {d0} exceeds V(0) = {}", self.v0));
            }
        }
        self.dist.validated()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `1 - 2λ√M₂`; the first condition holds when this is `≥ 0`.
    pub m2_margin: f64,
    pub kappa_star: Option<f64>,
    /// `1 - 2λ√K[κ*]`.
    pub k_margin: Option<f64>,
    /// `κ* - 4λ√Mexp[κ*] - α√(2L(0))`.
    pub mexp_margin: Option<f64>,
    pub feasible: bool,
    /// `2λ(1 - 2λ√K[κ*])`.
    pub omega: Option<f64>,
    pub l_zero: f64,
}

/// `2λ²M₃/√M₂`, the weight of `D(0)` in `L(0)`. Zero for the undelayed model.
pub fn delay_coefficient(dist: &DelayDistribution, lambda: f64) -> f64 {
    let m2 = dist.moment(2);
    if m2 == 0.0 {
        0.0
    } else {
        2.0 * lambda * lambda * dist.moment(3) / m2.sqrt()
    }
}

pub fn l_zero(input: &ConditionInput) -> f64 {
    let c = delay_coefficient(&input.dist, input.lambda);
    match input.d0 {
        Some(d0) if !input.use_weak_form => input.v0 + c * d0,
        _ => (1.0 + c) * input.v0,
    }
}

pub fn m2_margin(dist: &DelayDistribution, lambda: f64) -> f64 {
    1.0 - 2.0 * lambda * dist.moment(2).sqrt()
}

/// Evaluates all three conditions at a given `κ > 0`.
pub fn check_conditions(input: &ConditionInput, kappa: f64) -> Result<ConditionReport, ConditionError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(ConditionError::InvalidInput(format!("kappa must be positive, got {kappa}")));
    }
    let lambda = input.lambda;
    let l0 = l_zero(input);
    let m2m = m2_margin(&input.dist, lambda);
    let km = 1.0 - 2.0 * lambda * input.dist.k_moment(kappa)?.sqrt();
    let mm = kappa - 4.0 * lambda * input.dist.exp_moment(kappa)?.sqrt() - input.alpha * (2.0 * l0).sqrt();
    Ok(ConditionReport {
        m2_margin: m2m,
        kappa_star: Some(kappa),
        k_margin: Some(km),
        mexp_margin: Some(mm),
        feasible: m2m >= 0.0 && km > 0.0 && mm > 0.0,
        omega: Some(2.0 * lambda * km),
        l_zero: l0,
    })
}

/// Range of κ on which `2λ√K[κ] < 1` (and `Mexp` converges).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum KappaDomain {
    Empty,
    /// `(0, hi]` with `hi` strictly admissible.
    UpTo(f64),
    Unbounded,
}

pub(crate) fn kappa_domain(dist: &DelayDistribution, lambda: f64) -> KappaDomain {
    let m2 = dist.moment(2);
    if 1.0 - 2.0 * lambda * m2.sqrt() <= 0.0 {
        // K[κ] > M₂ for every κ > 0, so the strict condition cannot hold
        return KappaDomain::Empty;
    }
    let m3 = dist.moment(3);
    if m3 == 0.0 {
        return KappaDomain::Unbounded;
    }
    let admissible = |k: f64| match dist.k_moment(k) {
        Ok(kv) => 1.0 - 2.0 * lambda * kv.sqrt() > 0.0,
        Err(_) => false,
    };
    // K[κ] ≥ M₂ + κM₃/2 (every Taylor coefficient is nonnegative), which caps κ
    let mut hi = (1.0 - 4.0 * lambda * lambda * m2) / (2.0 * lambda * lambda * m3);
    if let DelayDistribution::Exponential { mu } = dist {
        hi = hi.min(1.0 / mu);
    }
    // geometric bracket [lo, 2lo] first, so the bisection tolerance is relative
    let mut lo = hi;
    if admissible(lo) {
        while admissible(2.0 * lo) {
            lo *= 2.0;
        }
    } else {
        loop {
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE * 1e10 {
                return KappaDomain::Empty;
            }
            if admissible(lo) {
                break;
            }
        }
    }
    KappaDomain::UpTo(bisect_last_true(admissible, lo, 2.0 * lo, 1e-14 * lo))
}

/// Maximizes `κ - 4λ√Mexp[κ]` over the admissible κ-range.
///
/// Returns `(κ*, value)`, or `None` when the range is empty. For the
/// undelayed model the objective grows without bound and the result is
/// `Some((∞, ∞))`.
pub(crate) fn best_exp_margin(dist: &DelayDistribution, lambda: f64) -> Option<(f64, f64)> {
    let hi = match kappa_domain(dist, lambda) {
        KappaDomain::Empty => return None,
        KappaDomain::Unbounded => return Some((f64::INFINITY, f64::INFINITY)),
        KappaDomain::UpTo(hi) => hi,
    };
    let objective = |k: f64| match dist.exp_moment(k) {
        Ok(m) => k - 4.0 * lambda * m.sqrt(),
        Err(_) => f64::NEG_INFINITY,
    };
    // below 2λ²(A + B) the objective is certainly negative (it is at most κ - 4λ)
    let lo = match *dist {
        DelayDistribution::Uniform { a_lo, b_hi } => (2.0 * lambda * lambda * (a_lo + b_hi)).min(hi),
        _ => 0.0,
    };
    Some(golden_section_max(objective, lo, hi, KAPPA_TOL))
}

/// Searches for a `κ > 0` satisfying all three conditions, choosing the one
/// that maximizes the exponential-moment margin.
pub fn find_kappa(input: &ConditionInput) -> Option<f64> {
    let penalty = input.alpha * (2.0 * l_zero(input)).sqrt();
    let (kappa, value) = best_exp_margin(&input.dist, input.lambda)?;
    if kappa.is_infinite() {
        // undelayed model: any κ above 4λ + α√(2L(0)) works
        return Some(1.0 + 2.0 * (4.0 * input.lambda + penalty));
    }
    (kappa > 0.0 && value - penalty > 0.0).then_some(kappa)
}

/// Full report at the κ chosen by [`find_kappa`].
pub fn evaluate(input: &ConditionInput) -> Result<ConditionReport, ConditionError> {
    match find_kappa(input) {
        Some(kappa) => check_conditions(input, kappa),
        None => Ok(ConditionReport {
            m2_margin: m2_margin(&input.dist, input.lambda),
            kappa_star: None,
            k_margin: None,
            mexp_margin: None,
            feasible: false,
            omega: None,
            l_zero: l_zero(input),
        }),
    }
}
