use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("exponential moment diverges: kappa * mu = {product} >= 1")]
    DivergentMoment { product: f64 },
    #[error("quadrature order must be at least 1")]
    InvalidOrder,
    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot parse distribution literal `{literal}`: {reason}")]
    Parse { literal: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("communication rate evaluated at negative distance {0}")]
    NegativeDistance(f64),
    #[error("communication exponent must be finite and nonnegative, got {0}")]
    InvalidExponent(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("invalid condition input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    /// The state blew up; carries everything computed up to the last good step.
    #[error("non-finite or exploding state at t = {t}")]
    NonFiniteState { t: f64, partial: Box<crate::dde_sim::RunOutput> },
    #[error("history queried at t = {t}, outside the stored range")]
    HistoryUnderflow { t: f64 },
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
}
