//! Experiment CLI: `run` a config end to end, `solve` without checks,
//! `verify` checks against a precomputed field CSV, and `bounds` for the
//! closed-form θ/α/C computations.
//!
//! Exit codes: 0 all good, 1 failed checks, 2 configuration errors,
//! 3 solver non-convergence.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use plgrowth::bounds::{self, BoundParams};
use plgrowth::error::{Error, Result};
use plgrowth::experiment::{self, ExperimentConfig, SolverKind};
use plgrowth::grid::{build_grid, read_field_csv};

#[derive(Parser)]
#[command(name = "plgrowth", version, about = "Growth laboratory for p- and ∞-harmonic functions on unbounded convex planar domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, run the configured checks, write all artifacts.
    Run {
        /// Experiment config (or a manifest from a previous run).
        config: PathBuf,
    },
    /// Solve only; write the field, stats and manifest.
    Solve { config: PathBuf },
    /// Run the configured checks against a precomputed field CSV.
    Verify {
        config: PathBuf,
        #[arg(long)]
        field: PathBuf,
    },
    /// Closed-form bounds: θ and α from (n, κ₀, C), or the calibrated C
    /// from an empirical θ.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    kappa0: f64,
    #[arg(long = "C", conflicts_with = "theta_emp")]
    c: Option<f64>,
    #[arg(long)]
    theta_emp: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = experiment::run(&cfg)?;
            for rep in &outcome.reports {
                eprintln!(
                    "check {:<16} lhs {:<12.6} rhs {:<12.6} {}",
                    rep.name,
                    rep.lhs,
                    rep.rhs,
                    if rep.passed { "pass" } else { "FAIL" }
                );
            }
            if let Some(t) = &outcome.growth {
                eprintln!("alpha_fit {:.6}", t.alpha_fit);
            }
            eprintln!("artifacts in {}", cfg.output_dir.display());
            Ok(if outcome.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Solve { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = experiment::solve_only(&cfg)?;
            experiment::write_artifacts(&cfg, &outcome)?;
            eprintln!("artifacts in {}", cfg.output_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, field } => {
            let cfg = ExperimentConfig::load(&config)?;
            let grid = build_grid(
                &cfg.domain,
                cfg.domain.anchor,
                cfg.r_window,
                cfg.spacing,
            )?;
            let text = std::fs::read(&field)?;
            let field = read_field_csv(&grid, &mut text.as_slice())?;
            let solved_p = match cfg.solver {
                SolverKind::P | SolverKind::Continuation => cfg.psolve.as_ref().map(|p| p.p),
                SolverKind::Inf => None,
            };
            let (reports, growth, all_passed) = experiment::run_checks(&cfg, &field, solved_p)?;
            let outcome = experiment::RunOutcome {
                field,
                stats: Vec::new(),
                diffs: Vec::new(),
                growth,
                reports,
                all_passed,
            };
            for rep in &outcome.reports {
                eprintln!(
                    "check {:<16} lhs {:<12.6} rhs {:<12.6} {}",
                    rep.name,
                    rep.lhs,
                    rep.rhs,
                    if rep.passed { "pass" } else { "FAIL" }
                );
            }
            experiment::write_artifacts(&cfg, &outcome)?;
            Ok(if outcome.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Bounds(args) => {
            let doc = match (args.c, args.theta_emp) {
                (Some(c), None) => {
                    let params = BoundParams::new(args.n, args.kappa0, c)?;
                    serde_json::json!({
                        "theta": bounds::theta(params),
                        "alpha": bounds::alpha(params),
                    })
                }
                (None, Some(theta_emp)) => {
                    let c = bounds::calibrate_c(theta_emp, args.n, args.kappa0)?;
                    serde_json::json!({ "C": c })
                }
                _ => {
                    return Err(Error::Config(
                        "bounds needs exactly one of --C or --theta-emp".into(),
                    ))
                }
            };
            println!("{doc}");
            Ok(ExitCode::SUCCESS)
        }
    }
}
