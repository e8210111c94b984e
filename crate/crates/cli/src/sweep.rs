use flockcert::dde_sim::{constant_datum_dissipation, run, velocity_fluctuation, SwarmState};
use flockcert::flocking_conditions::evaluate;
use flockcert::{DelayDistribution, SimError};
use rayon::prelude::*;

use crate::commands::{auto_fit, certify, parse_values, sim_config};
use crate::output::{fmt_f64, fmt_opt, write_csv};
use crate::{CliError, ModelArgs, Outcome, SweepArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Lambda,
    Mu,
    Tau,
    A,
    B,
    AMax,
    V0,
    Beta,
}

impl Axis {
    fn parse(name: &str) -> Result<Self, CliError> {
        Ok(match name.trim() {
            "lambda" => Axis::Lambda,
            "mu" => Axis::Mu,
            "tau" => Axis::Tau,
            "a" => Axis::A,
            "b" => Axis::B,
            "A" => Axis::AMax,
            "v0" => Axis::V0,
            "beta" => Axis::Beta,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown axis `{other}` (expected lambda, mu, tau, a, b, A, v0 or beta)"
                )))
            }
        })
    }

    fn name(self) -> &'static str {
        match self {
            Axis::Lambda => "lambda",
            Axis::Mu => "mu",
            Axis::Tau => "tau",
            Axis::A => "a",
            Axis::B => "b",
            Axis::AMax => "A",
            Axis::V0 => "v0",
            Axis::Beta => "beta",
        }
    }

    fn check_dist(self, dist: &DelayDistribution) -> Result<(), CliError> {
        let ok = match (self, dist) {
            (Axis::Mu, DelayDistribution::Exponential { .. }) => true,
            (Axis::Tau, DelayDistribution::Dirac { .. }) => true,
            (Axis::A | Axis::B, DelayDistribution::Uniform { .. }) => true,
            (Axis::AMax, DelayDistribution::Linear { .. }) => true,
            (Axis::Mu | Axis::Tau | Axis::A | Axis::B | Axis::AMax, _) => false,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Usage(format!("axis `{}` does not apply to {dist}", self.name())))
        }
    }

    fn apply(self, model: &mut ModelArgs, v0: &mut f64, value: f64) {
        match (self, &mut model.dist) {
            (Axis::Lambda, _) => model.lambda = value,
            (Axis::Beta, _) => model.beta = Some(value),
            (Axis::V0, _) => *v0 = value,
            (Axis::Mu, DelayDistribution::Exponential { mu }) => *mu = value,
            (Axis::Tau, DelayDistribution::Dirac { tau }) => *tau = value,
            (Axis::A, DelayDistribution::Uniform { a_lo, .. }) => *a_lo = value,
            (Axis::B, DelayDistribution::Uniform { b_hi, .. }) => *b_hi = value,
            (Axis::AMax, DelayDistribution::Linear { a_max }) => *a_max = value,
            _ => unreachable!("axis checked against the distribution"),
        }
    }
}

fn parse_axis(spec: &str) -> Result<(Axis, Vec<f64>), CliError> {
    let (name, values) = if let Some((name, rest)) = spec.split_once('=') {
        (name, rest)
    } else if let Some((name, rest)) = spec.split_once(':') {
        (name, rest)
    } else {
        return Err(CliError::Usage(format!(
            "malformed axis `{spec}` (expected name:start:end:count or name=v1,v2,...)"
        )));
    };
    let axis = Axis::parse(name)?;
    let values = if spec.contains('=') {
        if values.contains(':') {
            return Err(CliError::Usage(format!("malformed axis `{spec}`")));
        }
        parse_values(values)?
    } else {
        if !values.contains(':') {
            return Err(CliError::Usage(format!("malformed axis `{spec}`")));
        }
        parse_values(values)?
    };
    Ok((axis, values))
}

/// Rescales velocities about their mean so that `V` becomes `target`.
fn rescale_velocities(init: &SwarmState, target: f64) -> Result<SwarmState, CliError> {
    let current = velocity_fluctuation(init.n, init.d, &init.v);
    if current <= 0.0 {
        return Err(CliError::Usage("cannot rescale a swarm with V(0) = 0 onto a v0 axis".into()));
    }
    let c = (target / current).sqrt();
    let (n, d) = (init.n, init.d);
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(init.velocity(i)) {
            *m += v / n as f64;
        }
    }
    let mut out = init.clone();
    for i in 0..n {
        for k in 0..d {
            out.v[i * d + k] = mean[k] + c * (init.v[i * d + k] - mean[k]);
        }
    }
    Ok(out)
}

struct Point {
    value: f64,
    model: ModelArgs,
    v0: f64,
    feasible: bool,
    kappa_star: Option<f64>,
    omega: Option<f64>,
    fitted: Option<f64>,
}

fn point(args: &SweepArgs, axis: Axis, value: f64) -> Result<Point, CliError> {
    let mut model = args.model.clone();
    let mut v0 = args.v0;
    axis.apply(&mut model, &mut v0, value);
    let mut fitted = None;
    let (v0, d0) = if args.simulate {
        let mut init = args.swarm.initial()?;
        if axis == Axis::V0 {
            init = rescale_velocities(&init, value)?;
        }
        let cfg = sim_config(&model, args.dt, args.tmax, args.swarm.seed)?;
        match run(&cfg, &init) {
            Ok(out) => fitted = auto_fit(&out.diagnostics),
            Err(SimError::NonFiniteState { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        let v0 = velocity_fluctuation(init.n, init.d, &init.v);
        (v0, Some(args.d0.unwrap_or_else(|| constant_datum_dissipation(&init, &cfg.rate))))
    } else {
        (v0, args.d0)
    };
    let input = certify(&model, v0, d0, false)?;
    let report = evaluate(&input)?;
    Ok(Point {
        value,
        model,
        v0,
        feasible: report.feasible,
        kappa_star: report.kappa_star,
        omega: report.omega,
        fitted,
    })
}

pub fn sweep(args: SweepArgs) -> Result<Outcome, CliError> {
    let (axis, values) = parse_axis(&args.axis)?;
    axis.check_dist(&args.model.dist)?;
    let mut points = values
        .par_iter()
        .map(|&v| point(&args, axis, v))
        .collect::<Result<Vec<_>, _>>()?;
    points.sort_by(|p, q| p.value.total_cmp(&q.value));

    let header: Vec<String> = [
        "axis", "value", "lambda", "dist", "beta", "alpha", "v0", "feasible", "kappa_star", "omega",
        "fitted_decay_rate",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                axis.name().to_string(),
                fmt_f64(p.value),
                fmt_f64(p.model.lambda),
                p.model.dist.to_string(),
                fmt_opt(p.model.beta),
                fmt_f64(p.model.alpha()),
                fmt_f64(p.v0),
                p.feasible.to_string(),
                fmt_opt(p.kappa_star),
                fmt_opt(p.omega),
                fmt_opt(p.fitted),
            ]
        })
        .collect();
    write_csv(args.out.as_deref(), &header, &rows)?;
    Ok(Outcome::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_specs() {
        let (a, v) = parse_axis("lambda:0.1:0.3:3").unwrap();
        assert_eq!(a, Axis::Lambda);
        assert_eq!(v.len(), 3);
        let (a, v) = parse_axis("A=0.1,0.2").unwrap();
        assert_eq!(a, Axis::AMax);
        assert_eq!(v, vec![0.1, 0.2]);
        assert!(parse_axis("lambda").is_err());
        assert!(parse_axis("gamma:0:1:2").is_err());
        assert!(parse_axis("mu:0:1").is_err());
        assert!(parse_axis("mu=0:1:2").is_err());
        assert!(Axis::Mu.check_dist(&DelayDistribution::Dirac { tau: 0.1 }).is_err());
    }
}
