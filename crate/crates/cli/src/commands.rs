use std::fs;

use flockcert::dde_sim::{
    constant_datum_dissipation, default_dt, fit_decay_rate, random_initial, run, velocity_fluctuation,
    verify_estimates, DiagnosticsSeries, SimConfig, SwarmState,
};
use flockcert::flocking_conditions::{
    critical_curve, critical_v0_exponential_paper, critical_v0_numeric, evaluate, l_zero, ConditionInput,
    CurveFamily, CurveTable, EXP_LAMBDA_MU_MAX,
};
use flockcert::numerics::linspace;
use flockcert::{CommunicationRate, ConditionError, DelayDistribution, SimError};
use serde_json::{json, Value};

use crate::output::{fmt_f64, json_num, json_opt, write_csv, write_json};
use crate::{CheckArgs, CliError, CriticalArgs, FiguresArgs, ModelArgs, Outcome, SimulateArgs, SwarmArgs};

impl From<ConditionError> for CliError {
    fn from(e: ConditionError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NonFiniteState { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl ModelArgs {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| 2.0 * self.beta.unwrap_or(0.0))
    }

    pub fn rate(&self) -> Result<CommunicationRate, CliError> {
        let beta = self.beta.ok_or_else(|| CliError::Usage("this command needs --beta".into()))?;
        CommunicationRate::new(beta).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// `dist` with quadrature settings checked up front.
    pub fn dist(&self) -> Result<DelayDistribution, CliError> {
        self.dist
            .quadrature(self.quad_order, self.tail_tol)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(self.dist)
    }

    pub fn input_json(&self, v0: f64, d0: Option<f64>, weak: bool) -> Value {
        json!({
            "lambda": json_num(self.lambda),
            "dist": self.dist.to_string(),
            "beta": json_opt(self.beta),
            "alpha": json_num(self.alpha()),
            "v0": json_num(v0),
            "d0": json_opt(d0),
            "weak": weak,
        })
    }
}

impl SwarmArgs {
    pub fn initial(&self) -> Result<SwarmState, CliError> {
        Ok(random_initial(self.n, self.dim, self.seed, self.pos_box, self.vel_dispersion, &[])?)
    }
}

/// Certificate for `(λ, P, α, V(0))`, using the measured `D(0)` unless `weak`.
pub fn certify(model: &ModelArgs, v0: f64, d0: Option<f64>, weak: bool) -> Result<ConditionInput, CliError> {
    let input = ConditionInput::new(model.lambda, model.dist()?, model.alpha(), v0)?;
    Ok(match d0 {
        Some(d0) if !weak => input.with_d0(d0)?,
        _ => input,
    })
}

pub fn check(args: CheckArgs) -> Result<Outcome, CliError> {
    let model = &args.model;
    let drawn = args.n.is_some()
        || args.dim.is_some()
        || args.seed.is_some()
        || args.pos_box.is_some()
        || args.vel_dispersion.is_some();
    let (v0, d0) = match (args.v0, drawn) {
        (Some(v0), _) => (v0, args.d0),
        (None, true) => {
            let swarm = SwarmArgs {
                n: args.n.unwrap_or(8),
                dim: args.dim.unwrap_or(2),
                seed: args.seed.unwrap_or(0),
                pos_box: args.pos_box.unwrap_or(1.0),
                vel_dispersion: args.vel_dispersion.unwrap_or(1.0),
            };
            let init = swarm.initial()?;
            let v0 = velocity_fluctuation(init.n, init.d, &init.v);
            let d0 = match args.d0 {
                Some(d0) => d0,
                None => constant_datum_dissipation(&init, &model.rate()?),
            };
            (v0, Some(d0))
        }
        (None, false) => return Err(CliError::Usage("give --v0 or an initial-condition spec (--N, --dim, ...)".into())),
    };
    let input = certify(model, v0, d0, args.weak)?;
    let report = evaluate(&input)?;
    let numeric = critical_v0_numeric(&input.dist, model.lambda, model.alpha())?;
    let paper = match input.dist {
        DelayDistribution::Exponential { mu } if model.lambda * mu > 0.0 && model.lambda * mu <= EXP_LAMBDA_MU_MAX => {
            Some(critical_v0_exponential_paper(model.lambda * mu, model.alpha())?)
        }
        _ => None,
    };
    let mut out = json!({
        "input": model.input_json(v0, d0, args.weak || d0.is_none()),
        "m2_margin": json_num(report.m2_margin),
        "kappa_star": json_opt(report.kappa_star),
        "k_margin": json_opt(report.k_margin),
        "mexp_margin": json_opt(report.mexp_margin),
        "feasible": report.feasible,
        "omega": json_opt(report.omega),
        "l_zero": json_num(report.l_zero),
        "critical_v0_numeric": json_num(numeric.value()),
    });
    if let Some(p) = paper {
        out["critical_v0_paper"] = json_num(p);
    }
    write_json(args.out.as_deref(), &out)?;
    Ok(if report.feasible { Outcome::Ok } else { Outcome::Infeasible })
}

/// `start:end:count` (inclusive, evenly spaced) or `v1,v2,...`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("malformed range `{spec}` (expected start:end:count or v1,v2,...)"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, end, count] = parts[..] else { return Err(bad()) };
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        Ok(linspace(num(start)?, num(end)?, count))
    } else if spec.trim().is_empty() {
        Ok(Vec::new())
    } else {
        spec.split(',').map(num).collect()
    }
}

fn table_rows(table: &CurveTable) -> (Vec<String>, Vec<Vec<String>>) {
    let header = table.columns.iter().map(|c| c.to_string()).collect();
    let rows = table.rows.iter().map(|r| r.iter().map(|&v| fmt_f64(v)).collect()).collect();
    (header, rows)
}

pub fn critical(args: CriticalArgs) -> Result<Outcome, CliError> {
    let grid = match &args.grid {
        Some(g) => parse_values(g)?,
        None => args.fig.default_grid(),
    };
    let table = critical_curve(args.fig, &grid, args.alpha)?;
    let (header, rows) = table_rows(&table);
    write_csv(args.out.as_deref(), &header, &rows)?;
    Ok(Outcome::Ok)
}

pub fn figures(args: FiguresArgs) -> Result<Outcome, CliError> {
    fs::create_dir_all(&args.out)?;
    for fig in CurveFamily::ALL {
        let table = critical_curve(fig, &fig.default_grid(), args.alpha)?;
        let (header, rows) = table_rows(&table);
        write_csv(Some(&args.out.join(format!("{}.csv", fig.id()))), &header, &rows)?;
    }
    Ok(Outcome::Ok)
}

pub fn sim_config(model: &ModelArgs, dt: Option<f64>, tmax: f64, seed: u64) -> Result<SimConfig, CliError> {
    let dist = model.dist()?;
    let dt = dt.unwrap_or_else(|| default_dt(dist.truncation_horizon(model.tail_tol)));
    Ok(SimConfig {
        lambda: model.lambda,
        rate: model.rate()?,
        dist,
        dt,
        t_end: tmax,
        quad_order: model.quad_order,
        tail_mass_tol: model.tail_tol,
        seed,
        diag_stride: 1,
    })
}

/// Decay rate over `[t_end/10, last t with V ≥ 1e-24 V(0)]`, if that window
/// is usable.
pub fn auto_fit(series: &DiagnosticsSeries) -> Option<f64> {
    let v0 = series.rows.first()?.v;
    let t_end = series.rows.last()?.t;
    let t_b = series.rows.iter().take_while(|r| r.v >= 1e-24 * v0).last()?.t;
    fit_decay_rate(series, (0.1 * t_end, t_b)).ok()
}

fn diagnostics_csv(series: &DiagnosticsSeries) -> (Vec<String>, Vec<Vec<String>>) {
    let rows = series.rows.iter().map(|r| r.values().into_iter().map(fmt_f64).collect()).collect();
    (series.header(), rows)
}

pub fn simulate(args: SimulateArgs) -> Result<Outcome, CliError> {
    let model = &args.model;
    let cfg = sim_config(model, args.dt, args.tmax, args.swarm.seed)?;
    let init = args.swarm.initial()?;
    let output = match run(&cfg, &init) {
        Ok(out) => out,
        Err(SimError::NonFiniteState { t, partial }) => {
            let (header, rows) = diagnostics_csv(&partial.diagnostics);
            write_csv(Some(&args.out), &header, &rows)?;
            return Err(CliError::Numerical(format!("state blew up at t = {t}; partial diagnostics written")));
        }
        Err(e) => return Err(e.into()),
    };
    let series = &output.diagnostics;
    let (header, rows) = diagnostics_csv(series);
    write_csv(Some(&args.out), &header, &rows)?;

    let v0 = series.rows[0].v;
    let d0 = series.rows[0].d;
    let input = certify(model, v0, Some(d0), args.weak)?;
    let report = evaluate(&input)?;
    let violations = report
        .kappa_star
        .filter(|_| report.feasible)
        .map(|kappa| verify_estimates(series, kappa, &cfg, l_zero(&input)).len());
    let summary = json!({
        "input": model.input_json(v0, Some(d0), args.weak),
        "N": init.n,
        "dim": init.d,
        "seed": args.swarm.seed,
        "dt": json_num(cfg.dt),
        "t_end": json_num(series.rows.last().map_or(0.0, |r| r.t)),
        "V0": json_num(v0),
        "D0": json_num(d0),
        "L0": json_num(series.l_zero),
        "fitted_decay_rate": json_opt(auto_fit(series)),
        "feasible": report.feasible,
        "kappa_star": json_opt(report.kappa_star),
        "omega": json_opt(report.omega),
        "violations_count": violations,
    });
    write_json(Some(&args.out.with_extension("json")), &summary)?;
    write_json(None, &summary)?;
    Ok(Outcome::Ok)
}
