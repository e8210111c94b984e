//! Critical initial fluctuations `V(0)/λ²`.

use serde::{Serialize, Serializer};

use super::{best_exp_margin, delay_coefficient};
use crate::delay_dist::DelayDistribution;
use crate::error::ConditionError;
use crate::numerics::bisect_last_true;

/// Largest admissible `λμ` for the exponential distribution, `(2√2)^{-1}`.
pub const EXP_LAMBDA_MU_MAX: f64 = 0.353_553_390_593_273_8;

/// Critical value of `V(0)/λ²`; `Unbounded` when every fluctuation is
/// admissible (`α = 0` with a positive margin, or the undelayed model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Finite(f64),
    Unbounded,
}

impl Threshold {
    pub fn value(&self) -> f64 {
        match *self {
            Self::Finite(v) => v,
            Self::Unbounded => f64::INFINITY,
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Self::Finite(v) => s.serialize_f64(v),
            Self::Unbounded => s.serialize_str("inf"),
        }
    }
}

/// Closed-form exponential threshold as printed:
/// `[2(1 + 12x²/√2)]^{-1} · ((1 - 2x² - 2x√(x² + 1)) / (αx))²` with `x = λμ`.
///
/// This expression does not agree with a direct maximization of the
/// conditions for `λμ ≳ 0.096`; see [`critical_v0_numeric`].
pub fn critical_v0_exponential_paper(lambda_mu: f64, alpha: f64) -> Result<f64, ConditionError> {
    let x = lambda_mu;
    if !(x > 0.0 && x <= EXP_LAMBDA_MU_MAX) {
        return Err(ConditionError::DomainViolation(format!(
            "lambda*mu = {x} outside (0, (2*sqrt(2))^-1]"
        )));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(ConditionError::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
    }
    let bracket = 1.0 - 2.0 * x * x - 2.0 * x * (x * x + 1.0).sqrt();
    let prefactor = 1.0 / (2.0 * (1.0 + 12.0 * x * x / 2f64.sqrt()));
    let ratio = bracket / (alpha * x);
    Ok(prefactor * ratio * ratio)
}

/// Supremum of `V(0)/λ²` for which a feasible κ exists (weak form of the
/// exponential-moment condition):
/// `max_κ [(κ - 4λ√Mexp[κ])⁺]² / (2α²λ²(1 + 2λ²M₃/√M₂))`.
pub fn critical_v0_numeric(
    dist: &DelayDistribution,
    lambda: f64,
    alpha: f64,
) -> Result<Threshold, ConditionError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ConditionError::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(ConditionError::InvalidInput(format!("alpha must be nonnegative, got {alpha}")));
    }
    dist.validated()?;
    let Some((_, best)) = best_exp_margin(dist, lambda) else {
        return Ok(Threshold::Finite(0.0));
    };
    if best <= 0.0 {
        return Ok(Threshold::Finite(0.0));
    }
    if alpha == 0.0 || best.is_infinite() {
        return Ok(Threshold::Unbounded);
    }
    let c = delay_coefficient(dist, lambda);
    Ok(Threshold::Finite(best * best / (2.0 * alpha * alpha * lambda * lambda * (1.0 + c))))
}

/// `λμ` at which the exponential distribution stops admitting any κ, even
/// for `V(0) = 0`.
pub fn exponential_feasibility_boundary() -> f64 {
    let feasible = |x: f64| {
        DelayDistribution::exponential(x)
            .ok()
            .and_then(|d| best_exp_margin(&d, 1.0))
            .is_some_and(|(_, v)| v > 0.0)
    };
    bisect_last_true(feasible, 1e-6, EXP_LAMBDA_MU_MAX, 1e-13)
}
