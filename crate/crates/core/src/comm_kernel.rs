//! Communication rates `ψ(r) = (1 + r²)^{-β}` and their structural
//! assumptions: boundedness, a slowly decaying tail, and a log-derivative
//! bound `ψ'(r) ≥ -α ψ(r)`.

use serde::Serialize;

use crate::error::RateError;

/// Lower-bound certificate `ψ(r) ≥ c · r^{-1+γ}` for `r ≥ R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub gamma: f64,
    pub c: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommunicationRate {
    beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssumptionReport {
    pub bounded: bool,
    pub tail_ok: bool,
    pub log_derivative_ok: bool,
}

impl CommunicationRate {
    pub fn new(beta: f64) -> Result<Self, RateError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(RateError::InvalidExponent(beta));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Log-derivative constant `α = 2β`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.beta
    }

    /// Present only when `β < 1/2`, with `γ = 1 - 2β`, `c = 2^{-β}`, `R = 1`.
    pub fn tail(&self) -> Option<TailBound> {
        (self.beta < 0.5).then(|| TailBound {
            gamma: 1.0 - 2.0 * self.beta,
            c: 2f64.powf(-self.beta),
            r: 1.0,
        })
    }

    pub fn psi(&self, r: f64) -> Result<f64, RateError> {
        if r < 0.0 {
            return Err(RateError::NegativeDistance(r));
        }
        Ok(self.psi_sq(r * r))
    }

    /// `ψ` as a function of the squared distance; the hot path in the simulator.
    #[inline]
    pub fn psi_sq(&self, r2: f64) -> f64 {
        if self.beta == 0.0 {
            1.0
        } else {
            (-self.beta * r2.ln_1p()).exp()
        }
    }

    pub fn psi_prime(&self, r: f64) -> Result<f64, RateError> {
        if r < 0.0 {
            return Err(RateError::NegativeDistance(r));
        }
        if self.beta == 0.0 {
            return Ok(0.0);
        }
        Ok(-2.0 * self.beta * r * (-(self.beta + 1.0) * (r * r).ln_1p()).exp())
    }

    pub fn check_assumptions(&self) -> AssumptionReport {
        // |ψ'/ψ| = 2βr/(1 + r²) ≤ β, so the analytic bound α = 2β always holds;
        // the grid scan confirms it pointwise.
        let alpha = self.alpha();
        let analytic = self.beta <= alpha;
        let grid_ok = (0..=1200).all(|i| {
            let r = 10f64.powf(-6.0 + 12.0 * i as f64 / 1200.0);
            let psi = self.psi(r).unwrap_or(f64::NAN);
            let dpsi = self.psi_prime(r).unwrap_or(f64::NAN);
            dpsi >= -alpha * psi * (1.0 + 1e-12)
        });
        AssumptionReport {
            bounded: true,
            tail_ok: self.tail().is_some(),
            log_derivative_ok: analytic && grid_ok,
        }
    }
}
