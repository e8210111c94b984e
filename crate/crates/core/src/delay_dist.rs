//! Delay measures on `[0, ∞)`: closed-form moments, exponential moments,
//! the mixed moment `K[κ] = ∫ s (e^{κs} - 1)/κ dP(s)`, and quadrature rules
//! for integrating against the measure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DistError;
use crate::numerics::{factorial, gauss_legendre, phi};

pub const DEFAULT_QUAD_ORDER: usize = 32;
pub const DEFAULT_TAIL_MASS_TOL: f64 = 1e-12;

/// Below this value of `κ · horizon` the moments are evaluated by their
/// Taylor series in `κ`.
const SMALL_KAPPA_THRESHOLD: f64 = 1e-4;
const SERIES_TERMS: u32 = 6;

/// Probability measure of reaction delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DelayDistribution {
    /// Point mass at `tau`. `tau = 0` is the undelayed model.
    Dirac { tau: f64 },
    /// Density `e^{-s/mu} / mu`.
    Exponential { mu: f64 },
    /// Uniform on `[a_lo, b_hi]`.
    Uniform { a_lo: f64, b_hi: f64 },
    /// Density `2 (a_max - s)^+ / a_max^2` on `[0, a_max]`.
    Linear { a_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentValues {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// `(κ, Mexp[κ])` pairs.
    pub mexp_at: Vec<(f64, f64)>,
    /// `(κ, K[κ])` pairs.
    pub k_at: Vec<(f64, f64)>,
}

/// Discrete approximation of the delay measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Mass of the measure beyond the last node that was cut off and
    /// redistributed by renormalization. Zero for compact support.
    pub truncation_tail_mass: f64,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * f(s)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

impl DelayDistribution {
    pub fn dirac(tau: f64) -> Result<Self, DistError> {
        Self::Dirac { tau }.validated()
    }

    pub fn exponential(mu: f64) -> Result<Self, DistError> {
        Self::Exponential { mu }.validated()
    }

    pub fn uniform(a_lo: f64, b_hi: f64) -> Result<Self, DistError> {
        Self::Uniform { a_lo, b_hi }.validated()
    }

    pub fn linear(a_max: f64) -> Result<Self, DistError> {
        Self::Linear { a_max }.validated()
    }

    /// Checks the parameter invariants, returning the distribution unchanged.
    pub fn validated(self) -> Result<Self, DistError> {
        let bad = |msg: String| Err(DistError::InvalidParameters(msg));
        match self {
            Self::Dirac { tau } if !(tau.is_finite() && tau >= 0.0) => {
                bad(format!("dirac needs tau >= 0, got {tau}"))
            }
            Self::Exponential { mu } if !(mu.is_finite() && mu > 0.0) => {
                bad(format!("exponential needs mu > 0, got {mu}"))
            }
            Self::Uniform { a_lo, b_hi }
                if !(a_lo.is_finite() && b_hi.is_finite() && a_lo >= 0.0 && a_lo < b_hi) =>
            {
                bad(format!("uniform needs 0 <= a < b, got a={a_lo}, b={b_hi}"))
            }
            Self::Linear { a_max } if !(a_max.is_finite() && a_max > 0.0) => {
                bad(format!("linear needs A > 0, got {a_max}"))
            }
            ok => Ok(ok),
        }
    }

    /// True for the undelayed point mass at zero.
    pub fn is_instantaneous(&self) -> bool {
        matches!(self, Self::Dirac { tau } if *tau == 0.0)
    }

    /// `M_k = ∫ s^k dP(s)`.
    pub fn moment(&self, k: u32) -> f64 {
        let ki = k as i32;
        match *self {
            Self::Dirac { tau } => tau.powi(ki),
            Self::Exponential { mu } => factorial(k) * mu.powi(ki),
            Self::Uniform { a_lo, b_hi } => {
                // (B^{k+1} - A^{k+1}) / ((k+1)(B-A)) without the subtraction
                let sum: f64 = (0..=ki).map(|j| a_lo.powi(j) * b_hi.powi(ki - j)).sum();
                sum / (k as f64 + 1.0)
            }
            Self::Linear { a_max } => {
                2.0 * a_max.powi(ki) / ((k as f64 + 1.0) * (k as f64 + 2.0))
            }
        }
    }

    /// Moment generating function `Mexp[κ] = ∫ e^{κs} dP(s)` for `κ ≥ 0`.
    pub fn exp_moment(&self, kappa: f64) -> Result<f64, DistError> {
        if kappa == 0.0 {
            return Ok(1.0);
        }
        match *self {
            Self::Dirac { tau } => Ok((kappa * tau).exp()),
            Self::Exponential { mu } => {
                let product = kappa * mu;
                if product >= 1.0 {
                    return Err(DistError::DivergentMoment { product });
                }
                Ok(1.0 / (1.0 - product))
            }
            _ if self.use_series(kappa) => Ok((0..SERIES_TERMS)
                .map(|k| kappa.powi(k as i32) * self.moment(k) / factorial(k))
                .sum()),
            Self::Uniform { a_lo, b_hi } => {
                let z = kappa * (b_hi - a_lo);
                Ok((kappa * a_lo).exp() * phi(1, z))
            }
            Self::Linear { a_max } => Ok(2.0 * phi(2, kappa * a_max)),
        }
    }

    /// Mixed moment `K[κ] = ∫ s (e^{κs} - 1)/κ dP(s)`; `K[0] = M_2`.
    pub fn k_moment(&self, kappa: f64) -> Result<f64, DistError> {
        if kappa == 0.0 {
            return Ok(self.moment(2));
        }
        if let Self::Exponential { mu } = *self {
            let product = kappa * mu;
            if product >= 1.0 {
                return Err(DistError::DivergentMoment { product });
            }
        }
        if self.use_series(kappa) {
            // K[κ] = Σ_n κ^n M_{n+2} / (n+1)!
            return Ok((0..SERIES_TERMS)
                .map(|n| kappa.powi(n as i32) * self.moment(n + 2) / factorial(n + 1))
                .sum());
        }
        Ok(match *self {
            Self::Dirac { tau } => tau * tau * phi(1, kappa * tau),
            Self::Exponential { mu } => {
                let q = 1.0 - kappa * mu;
                (2.0 - kappa * mu) / (q * q) * mu * mu
            }
            Self::Uniform { a_lo, b_hi } => {
                let w = b_hi - a_lo;
                let z = kappa * w;
                let (p1, p2) = (phi(1, z), phi(2, z));
                // ∫ s e^{κs} dP with s = a + w u
                let first = (kappa * a_lo).exp() * (a_lo * p1 + w * (p1 - p2));
                (first - self.moment(1)) / kappa
            }
            Self::Linear { a_max } => {
                let z = kappa * a_max;
                2.0 * a_max * a_max * (phi(3, z) - 2.0 * phi(4, z))
            }
        })
    }

    fn use_series(&self, kappa: f64) -> bool {
        kappa.abs() * self.truncation_horizon(DEFAULT_TAIL_MASS_TOL) < SMALL_KAPPA_THRESHOLD
    }

    /// Smallest `s_max` with `P((s_max, ∞)) <= tail_mass_tol`.
    pub fn truncation_horizon(&self, tail_mass_tol: f64) -> f64 {
        match *self {
            Self::Dirac { tau } => tau,
            Self::Exponential { mu } => mu * (1.0 / tail_mass_tol).ln(),
            Self::Uniform { b_hi, .. } => b_hi,
            Self::Linear { a_max } => a_max,
        }
    }

    /// Gauss-type rule for `∫ f(s) dP(s)`.
    ///
    /// Compact variants map a Gauss–Legendre rule onto their support and fold
    /// the density into the weights. The exponential variant does the same on
    /// `[0, truncation_horizon]` and renormalizes the weights to unit mass.
    pub fn quadrature(&self, order: usize, tail_mass_tol: f64) -> Result<Quadrature, DistError> {
        if order < 1 {
            return Err(DistError::InvalidOrder);
        }
        if let Self::Dirac { tau } = *self {
            return Ok(Quadrature { nodes: vec![tau], weights: vec![1.0], truncation_tail_mass: 0.0 });
        }
        if let Self::Exponential { .. } = self {
            if !(tail_mass_tol > 0.0 && tail_mass_tol < 1.0) {
                return Err(DistError::InvalidParameters(format!(
                    "tail mass tolerance must lie in (0, 1), got {tail_mass_tol}"
                )));
            }
        }
        let (x, w) = gauss_legendre(order);
        let (lo, hi) = match *self {
            Self::Uniform { a_lo, b_hi } => (a_lo, b_hi),
            _ => (0.0, self.truncation_horizon(tail_mass_tol)),
        };
        let half = 0.5 * (hi - lo);
        let nodes: Vec<f64> = x.iter().map(|xi| lo + half * (xi + 1.0)).collect();
        let mut weights: Vec<f64> =
            nodes.iter().zip(&w).map(|(&s, &wi)| half * wi * self.density(s)).collect();
        let mut tail = 0.0;
        if let Self::Exponential { .. } = self {
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|wi| *wi /= total);
            tail = tail_mass_tol;
        }
        Ok(Quadrature { nodes, weights, truncation_tail_mass: tail })
    }

    /// Lebesgue density; undefined (zero) for the point mass.
    fn density(&self, s: f64) -> f64 {
        match *self {
            Self::Dirac { .. } => 0.0,
            Self::Exponential { mu } => (-s / mu).exp() / mu,
            Self::Uniform { a_lo, b_hi } => {
                if s >= a_lo && s <= b_hi {
                    1.0 / (b_hi - a_lo)
                } else {
                    0.0
                }
            }
            Self::Linear { a_max } => 2.0 * (a_max - s).max(0.0) / (a_max * a_max),
        }
    }

    pub fn moment_values(&self, kappas: &[f64]) -> Result<MomentValues, DistError> {
        let mut mexp_at = Vec::with_capacity(kappas.len());
        let mut k_at = Vec::with_capacity(kappas.len());
        for &k in kappas {
            mexp_at.push((k, self.exp_moment(k)?));
            k_at.push((k, self.k_moment(k)?));
        }
        Ok(MomentValues { m1: self.moment(1), m2: self.moment(2), m3: self.moment(3), mexp_at, k_at })
    }

    /// Returns the same distribution with time rescaled by `factor`
    /// (`s ↦ factor · s`).
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Dirac { tau } => Self::Dirac { tau: tau * factor },
            Self::Exponential { mu } => Self::Exponential { mu: mu * factor },
            Self::Uniform { a_lo, b_hi } => Self::Uniform { a_lo: a_lo * factor, b_hi: b_hi * factor },
            Self::Linear { a_max } => Self::Linear { a_max: a_max * factor },
        }
    }
}

impl fmt::Display for DelayDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Dirac { tau } => write!(f, "dirac:tau={tau}"),
            Self::Exponential { mu } => write!(f, "exponential:mu={mu}"),
            Self::Uniform { a_lo, b_hi } => write!(f, "uniform:a={a_lo},b={b_hi}"),
            Self::Linear { a_max } => write!(f, "linear:A={a_max}"),
        }
    }
}

impl FromStr for DelayDistribution {
    type Err = DistError;

    /// Parses `dirac:tau=<t>`, `exponential:mu=<t>`, `uniform:a=<t>,b=<t>`
    /// or `linear:A=<t>`.
    fn from_str(literal: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| DistError::Parse { literal: literal.to_string(), reason: reason.to_string() };
        let (kind, params) = literal.trim().split_once(':').ok_or_else(|| fail("missing `:`"))?;
        let mut pairs = Vec::new();
        for item in params.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| fail("expected key=value"))?;
            let value: f64 = value.trim().parse().map_err(|_| fail("non-numeric value"))?;
            pairs.push((key.trim(), value));
        }
        let get = |name: &str| -> Result<f64, DistError> {
            let mut found = pairs.iter().filter(|(k, _)| *k == name);
            let first = found.next().ok_or_else(|| fail(&format!("missing parameter `{name}`")))?;
            if found.next().is_some() {
                return Err(fail(&format!("duplicate parameter `{name}`")));
            }
            Ok(first.1)
        };
        let expect_keys = |n: usize| if pairs.len() == n { Ok(()) } else { Err(fail("unexpected parameters")) };
        let dist = match kind.trim().to_ascii_lowercase().as_str() {
            "dirac" => {
                expect_keys(1)?;
                Self::Dirac { tau: get("tau")? }
            }
            "exponential" | "exp" => {
                expect_keys(1)?;
                Self::Exponential { mu: get("mu")? }
            }
            "uniform" => {
                expect_keys(2)?;
                Self::Uniform { a_lo: get("a")?, b_hi: get("b")? }
            }
            "linear" => {
                expect_keys(1)?;
                Self::Linear { a_max: get("A")? }
            }
            _ => return Err(fail("unknown distribution kind")),
        };
        dist.validated().map_err(|e| fail(&e.to_string()))
    }
}
