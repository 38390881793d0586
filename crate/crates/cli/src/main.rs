mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use relmodes::coords::Domain;
use relmodes::ode::Tolerances;

use crate::commands::Ctx;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "relmodes", version, about = "Modal decomposition of linearized relative orbital motion")]
struct Cli {
    /// JSON run configuration (defaults to the Molniya reference orbit).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Coordinates of states and outputs.
    #[arg(long, global = true, value_enum)]
    rep: Option<Rep>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Number of chief periods to span.
    #[arg(long, global = true)]
    periods: Option<f64>,
    /// Relative integration tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Rep {
    Qns,
    Cart,
    Sph,
}

impl From<Rep> for Domain {
    fn from(r: Rep) -> Self {
        match r {
            Rep::Qns => Domain::Qns,
            Rep::Cart => Domain::Cartesian,
            Rep::Sph => Domain::Spherical,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the six normalized mode shapes.
    Modes,
    /// Split an initial state into modal constants and mode contributions.
    Decompose,
    /// Rebuild a trajectory from constants or an initial state.
    Reconstruct,
    /// Bounded planar family through a common initial position.
    Sweep,
    /// Numerical Floquet decomposition of a periodic plant.
    FloquetNum,
    /// Run the invariant suites and write a report.
    Validate,
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::molniya(),
    };
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        anyhow::bail!("--tol must be in (0, 1), got {}", cli.tol);
    }
    if let Some(p) = cli.periods {
        if !(p > 0.0 && p.is_finite()) {
            anyhow::bail!("--periods must be positive, got {p}");
        }
    }
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = Ctx {
        chief: cfg.chief()?,
        domain: cfg.domain(cli.rep.map(Domain::from))?,
        policy: cfg.policy.into(),
        cfg,
        out: cli.out,
        periods: cli.periods,
        tol: Tolerances::new(cli.tol, cli.tol * 1e-2),
    };
    match cli.command {
        Command::Modes => commands::modes(&ctx),
        Command::Decompose => commands::decompose(&ctx),
        Command::Reconstruct => commands::reconstruct(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::FloquetNum => commands::floquet_num(&ctx),
        Command::Validate => commands::validate(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RELMODES_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
