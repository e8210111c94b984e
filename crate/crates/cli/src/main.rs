//! `flockcert`: flocking certificates, critical curves, simulations and
//! parameter sweeps for Cucker–Smale dynamics with distributed delays.

mod commands;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flockcert::delay_dist::{DEFAULT_QUAD_ORDER, DEFAULT_TAIL_MASS_TOL};
use flockcert::flocking_conditions::CurveFamily;
use flockcert::DelayDistribution;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "flockcert", version, about = "Flocking certificates for Cucker-Smale dynamics with distributed delays")]
struct Cli {
    /// Worker threads for curves and sweeps (all cores when unset).
    #[arg(long, global = true, env = "FLOCKCERT_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the moment conditions and report a JSON certificate.
    Check(CheckArgs),
    /// Compute one figure's critical curve as CSV.
    Critical(CriticalArgs),
    /// Write all four figure CSVs into a directory.
    Figures(FiguresArgs),
    /// Integrate the delay system; diagnostics CSV plus a JSON summary.
    Simulate(SimulateArgs),
    /// Evaluate the conditions along one parameter axis.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Delay distribution, e.g. `exponential:mu=0.5` or `uniform:a=0,b=0.2`.
    #[arg(long, value_parser = parse_dist)]
    pub dist: DelayDistribution,
    /// Coupling strength λ.
    #[arg(long)]
    pub lambda: f64,
    /// Exponent of ψ(r) = (1 + r²)^{-β}.
    #[arg(long, required_unless_present = "alpha")]
    pub beta: Option<f64>,
    /// Log-derivative constant; defaults to 2β.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
    pub quad_order: usize,
    #[arg(long, default_value_t = DEFAULT_TAIL_MASS_TOL)]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SwarmArgs {
    /// Number of agents.
    #[arg(long = "N", default_value_t = 8)]
    pub n: usize,
    #[arg(long, visible_alias = "d", default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Half-width of the box positions are drawn from.
    #[arg(long, default_value_t = 1.0)]
    pub pos_box: f64,
    /// Standard deviation of the Gaussian velocities.
    #[arg(long, default_value_t = 1.0)]
    pub vel_dispersion: f64,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial velocity fluctuation V(0).
    #[arg(long, conflicts_with_all = ["n", "dim", "seed", "pos_box", "vel_dispersion"])]
    v0: Option<f64>,
    /// Initial dissipation D(0); without it L(0) is bounded through D(0) ≤ V(0).
    #[arg(long)]
    d0: Option<f64>,
    /// Use D(0) ≤ V(0) even when D(0) is known.
    #[arg(long)]
    weak: bool,
    /// Draw the initial datum instead of giving V(0).
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, visible_alias = "d")]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pos_box: Option<f64>,
    #[arg(long)]
    vel_dispersion: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CriticalArgs {
    #[arg(long, value_parser = parse_fig)]
    fig: CurveFamily,
    /// `start:end:count` or a comma-separated list; the figure's default otherwise.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    swarm: SwarmArgs,
    /// Step size; `min(1e-2, horizon/40)` by default.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Use D(0) ≤ V(0) when certifying the run.
    #[arg(long)]
    weak: bool,
    /// Diagnostics CSV path; the summary JSON goes next to it with a `.json` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// `name:start:end:count` or `name=v1,v2,...`; name is one of
    /// lambda, mu, tau, a, b, A, v0, beta.
    #[arg(long)]
    axis: String,
    #[arg(long, default_value_t = 0.0)]
    v0: f64,
    #[arg(long)]
    d0: Option<f64>,
    /// Also simulate every point and fit its decay rate.
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dist(s: &str) -> Result<DelayDistribution, String> {
    s.parse().map_err(|e: flockcert::DistError| e.to_string())
}

fn parse_fig(s: &str) -> Result<CurveFamily, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Successful outcomes that still map to a distinct exit code.
pub enum Outcome {
    Ok,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Critical(a) => commands::critical(a),
        Command::Figures(a) => commands::figures(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => sweep::sweep(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Numerical(_) => 4,
                CliError::Usage(_) => 2,
                _ => 1,
            })
        }
    }
}
