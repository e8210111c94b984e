//! Critical-threshold curves for the exponential, uniform and linear delay
//! distributions, expressed in the dimensionless variables `λ·scale` and
//! `V(0)/λ²` (equivalently `λ = 1`).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::threshold::{critical_v0_exponential_paper, critical_v0_numeric, EXP_LAMBDA_MU_MAX};
use super::{find_kappa, ConditionInput};
use crate::delay_dist::DelayDistribution;
use crate::error::ConditionError;
use crate::numerics::{bisect_last_true, linspace};

/// Bisection tolerance on `b` for the maximal uniform interval length.
pub const LENGTH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveFamily {
    /// Exponential: threshold against `λμ`, closed form and numeric.
    ExpFig1,
    /// Uniform with `V(0)/λ² = 1`: largest `b - a` against `a`.
    UniformFig2,
    /// Uniform on `[0, b]`: threshold against `b`.
    UniformFig3,
    /// Linear on `[0, a]`: threshold against `a`.
    LinearFig4,
}

impl CurveFamily {
    pub const ALL: [CurveFamily; 4] = [Self::ExpFig1, Self::UniformFig2, Self::UniformFig3, Self::LinearFig4];

    pub fn id(&self) -> &'static str {
        match self {
            Self::ExpFig1 => "fig1",
            Self::UniformFig2 => "fig2",
            Self::UniformFig3 => "fig3",
            Self::LinearFig4 => "fig4",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Self::ExpFig1 => &["lambda_mu", "critical_paper", "critical_numeric"],
            Self::UniformFig2 => &["a", "max_length"],
            Self::UniformFig3 => &["b", "critical_v0_over_lambda2"],
            Self::LinearFig4 => &["a", "critical_v0_over_lambda2"],
        }
    }

    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            Self::ExpFig1 => linspace(0.01, EXP_LAMBDA_MU_MAX, 200),
            Self::UniformFig2 => linspace(0.0, 0.17, 100),
            Self::UniformFig3 => linspace(0.2, 0.3, 100),
            Self::LinearFig4 => linspace(0.05, 0.4, 100),
        }
    }

    /// Closed range of abscissae on which the first moment condition can hold.
    fn domain(&self) -> (f64, f64, bool) {
        // (lo, hi, lo_inclusive)
        match self {
            Self::ExpFig1 => (0.0, EXP_LAMBDA_MU_MAX, false),
            Self::UniformFig2 => (0.0, 0.75f64.sqrt(), true),
            Self::UniformFig3 => (0.0, 0.75f64.sqrt(), false),
            Self::LinearFig4 => (0.0, 1.5f64.sqrt(), false),
        }
    }
}

impl fmt::Display for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CurveFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| format!("unknown figure id `{s}` (expected fig1, fig2, fig3 or fig4)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub family: CurveFamily,
    pub columns: Vec<&'static str>,
    /// One row per grid point, in grid order; the first entry is the abscissa.
    pub rows: Vec<Vec<f64>>,
}

/// Evaluates a figure's curve on `grid`. Points are computed in parallel and
/// assembled in grid order.
pub fn critical_curve(family: CurveFamily, grid: &[f64], alpha: f64) -> Result<CurveTable, ConditionError> {
    let (lo, hi, lo_inclusive) = family.domain();
    for &x in grid {
        let above_lo = if lo_inclusive { x >= lo } else { x > lo };
        if !(above_lo && x <= hi) {
            return Err(ConditionError::DomainViolation(format!(
                "abscissa {x} outside the domain of {family}"
            )));
        }
    }
    let rows = grid
        .par_iter()
        .map(|&x| curve_point(family, x, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CurveTable { family, columns: family.columns().to_vec(), rows })
}

fn curve_point(family: CurveFamily, x: f64, alpha: f64) -> Result<Vec<f64>, ConditionError> {
    Ok(match family {
        CurveFamily::ExpFig1 => {
            let dist = DelayDistribution::exponential(x)?;
            vec![
                x,
                critical_v0_exponential_paper(x, alpha)?,
                critical_v0_numeric(&dist, 1.0, alpha)?.value(),
            ]
        }
        CurveFamily::UniformFig2 => vec![x, max_uniform_length(x, alpha)?],
        CurveFamily::UniformFig3 => {
            let dist = DelayDistribution::uniform(0.0, x)?;
            vec![x, critical_v0_numeric(&dist, 1.0, alpha)?.value()]
        }
        CurveFamily::LinearFig4 => {
            let dist = DelayDistribution::linear(x)?;
            vec![x, critical_v0_numeric(&dist, 1.0, alpha)?.value()]
        }
    })
}

/// Largest `b - a` such that the uniform distribution on `[a, b]` admits a
/// feasible κ with `λ = 1` and `V(0) = 1`. Zero when even a vanishing
/// interval is infeasible.
pub fn max_uniform_length(a: f64, alpha: f64) -> Result<f64, ConditionError> {
    let feasible = |b: f64| {
        DelayDistribution::uniform(a, b)
            .ok()
            .and_then(|dist| ConditionInput::new(1.0, dist, alpha, 1.0).ok())
            .is_some_and(|input| find_kappa(&input).is_some())
    };
    let start = a + 1e-9;
    if !feasible(start) {
        return Ok(0.0);
    }
    // (4/3)(a² + ab + b²) = 1 bounds b from above
    let b_max = 0.5 * (-a + (3.0 - 3.0 * a * a).max(0.0).sqrt());
    let b = bisect_last_true(feasible, start, b_max.max(start), LENGTH_TOL);
    Ok(b - a)
}

/// `f_a(κ̄) = 4K[κ̄]` for the linear distribution on `[0, a]` at `λ = 1`;
/// the second moment condition reads `f_a < 1`.
pub fn linear_constraint(a: f64, kappa_bar: f64) -> Result<f64, ConditionError> {
    Ok(4.0 * DelayDistribution::linear(a)?.k_moment(kappa_bar)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_domain_abscissae_are_rejected() {
        assert!(critical_curve(CurveFamily::ExpFig1, &[0.4], 1.0).is_err());
        assert!(critical_curve(CurveFamily::LinearFig4, &[1.3], 1.0).is_err());
        assert!(critical_curve(CurveFamily::UniformFig3, &[0.0], 1.0).is_err());
        assert!(critical_curve(CurveFamily::UniformFig2, &[-0.01], 1.0).is_err());
    }

    #[test]
    fn fig1_paper_column_vanishes_at_right_end() {
        let t = critical_curve(CurveFamily::ExpFig1, &[0.05, EXP_LAMBDA_MU_MAX], 1.0).unwrap();
        assert!(t.rows[1][1] <= 1e-9);
        assert_eq!(t.rows[1][2], 0.0);
        assert!(t.rows[0][1] > t.rows[0][2]);
    }

    #[test]
    fn linear_constraint_agrees_with_printed_form() {
        // the printed expression, evaluated where cancellation is harmless
        let printed = |a: f64, k: f64| {
            let e = (a * k).exp();
            4.0 / k * (2.0 * (e + 1.0) / (a * k * k) + 4.0 * (1.0 - e) / (a * a * k * k * k) - a / 3.0)
        };
        for a in [0.05, 0.2, 0.4, 1.0] {
            for k in [5.0, 10.0, 30.0] {
                let ours = linear_constraint(a, k).unwrap();
                let theirs = printed(a, k);
                assert!((ours - theirs).abs() <= 1e-9 * theirs.abs().max(1e-3), "a={a} k={k}: {ours} vs {theirs}");
            }
        }
    }

    #[test]
    fn fig2_is_zero_beyond_feasibility() {
        assert_eq!(max_uniform_length(0.3, 1.0).unwrap(), 0.0);
        assert!(max_uniform_length(0.0, 1.0).unwrap() > 0.2);
    }

    #[test]
    fn curve_is_identical_across_thread_counts() {
        let grid = CurveFamily::LinearFig4.default_grid();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| critical_curve(CurveFamily::LinearFig4, &grid, 1.0)).unwrap();
        let b = four.install(|| critical_curve(CurveFamily::LinearFig4, &grid, 1.0)).unwrap();
        let bits = |t: &CurveTable| t.rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
