//! `roughstep <subcommand> --config <file> --out <dir> [--seed N]`
//!
//! Exit codes: 0 success, 2 configuration error (nothing written), 3
//! numerical failure.

mod artifacts;
mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{resolve_seed, Failure, Outcome};
use config::*;

#[derive(Parser)]
#[command(name = "roughstep", version, about = "Discrete schemes for rough differential equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory, optionally with a defect report.
    Solve(Common),
    /// Terminal-error rates over a sequence of meshes.
    Convergence(Common),
    /// Chen consistency on random triples and Riemann-sum area recovery.
    ChenCheck(Common),
    /// Cancellation statistic of consecutive small-interval areas.
    Condition21(Common),
    /// Two solutions from the same initial point.
    Nonuniqueness(Common),
    /// Blow-up driver, criterion integral and envelope classification.
    Explosion(Common),
    /// Two-sided Hölder chain curve.
    Curve(Common),
}

const CONFIG_ERROR: u8 = 2;
const NUMERICAL_FAILURE: u8 = 3;

fn load<C: DeserializeOwned>(path: &Path) -> Result<C, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Loads the config, resolves seed and output directory, runs and writes.
fn execute<C: DeserializeOwned + Serialize>(
    name: &str,
    common: &Common,
    seed_of: impl Fn(&mut C) -> &mut Option<u64>,
    out_of: impl Fn(&C) -> Option<PathBuf>,
    needs_seed: impl Fn(&C) -> bool,
    run: impl Fn(&C) -> Result<Outcome, Failure>,
) -> Result<&'static str, Failure> {
    let mut cfg: C = load(&common.config)?;
    let needed = needs_seed(&cfg);
    resolve_seed(seed_of(&mut cfg), common.seed, needed, name)?;
    let dir = common
        .out
        .clone()
        .or_else(|| out_of(&cfg))
        .ok_or_else(|| Failure::Config("no output directory: pass --out or set `out`".into()))?;
    let outcome = run(&cfg)?;
    let seed = *seed_of(&mut cfg);
    outcome
        .artifacts
        .write(&dir, name, outcome.status, seed, &cfg)
        .map_err(|e| Failure::Config(format!("writing {}: {e}", dir.display())))?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(c) => execute(
            "solve",
            c,
            |x: &mut SolveConfig| &mut x.seed,
            |x| x.out.clone(),
            |x| x.driver.stochastic(),
            commands::solve_cmd,
        ),
        Command::Convergence(c) => execute(
            "convergence",
            c,
            |x: &mut ConvergenceConfig| &mut x.seed,
            |x| x.out.clone(),
            |x| x.driver.stochastic(),
            commands::convergence_cmd,
        ),
        Command::ChenCheck(c) => execute(
            "chen-check",
            c,
            |x: &mut ChenCheckConfig| &mut x.seed,
            |x| x.out.clone(),
            |_| true,
            commands::chen_cmd,
        ),
        Command::Condition21(c) => execute(
            "condition21",
            c,
            |x: &mut Condition21Config| &mut x.seed,
            |x| x.out.clone(),
            |x| x.driver.stochastic(),
            commands::condition21_cmd,
        ),
        Command::Nonuniqueness(c) => execute(
            "nonuniqueness",
            c,
            |x: &mut NonuniquenessConfig| &mut x.seed,
            |x| x.out.clone(),
            |_| false,
            commands::nonuniqueness_cmd,
        ),
        Command::Explosion(c) => execute(
            "explosion",
            c,
            |x: &mut ExplosionConfig| &mut x.seed,
            |x| x.out.clone(),
            |_| false,
            commands::explosion_cmd,
        ),
        Command::Curve(c) => execute(
            "curve",
            c,
            |x: &mut CurveConfig| &mut x.seed,
            |x| x.out.clone(),
            |_| true,
            commands::curve_cmd,
        ),
    };
    match result {
        Ok("ok") => ExitCode::SUCCESS,
        Ok(status) => {
            eprintln!("roughstep: run finished with status `{status}`; artifacts written");
            ExitCode::from(NUMERICAL_FAILURE)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("roughstep: configuration error: {msg}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("roughstep: numerical failure: {msg}");
            ExitCode::from(NUMERICAL_FAILURE)
        }
    }
}
