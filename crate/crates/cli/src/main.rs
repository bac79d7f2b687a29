//! `avd`: batch experiment runner for the perturbed inertial
//! forward-backward solver and its continuous-time flow.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure,
//! 3 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use avd_core::config::ExperimentConfig;
use avd_core::runner;
use avd_core::Error;

#[derive(Parser)]
#[command(
    name = "avd",
    about = "Inertial forward-backward runs, damped-flow integration, parameter sweeps, and Lyapunov verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on a JSON config; writes history.csv and certification.json.
    Solve {
        /// Experiment config path.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accept alpha < 3 (outside the guarantee regime).
        #[arg(long)]
        allow_no_guarantee: bool,
    },
    /// Integrate the continuous flow; writes trajectory.csv with energies.
    SimulateOde {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; writes verdict.json.
    Verify {
        /// Suite name: fast or full.
        #[arg(long, default_value = "fast")]
        suite: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the alpha x p x s grid of a config; writes sweep_summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the cell pool.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        allow_no_guarantee: bool,
    },
}

fn load(config: &PathBuf) -> Result<(ExperimentConfig, Vec<u8>), Error> {
    let bytes = std::fs::read(config)
        .map_err(|e| Error::usage(format!("cannot read config {}: {e}", config.display())))?;
    let text = String::from_utf8_lossy(&bytes);
    let parsed = ExperimentConfig::from_json(&text)?;
    Ok((parsed, bytes))
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve { config, out, allow_no_guarantee } => {
            let (cfg, bytes) = load(&config)?;
            let artifacts =
                runner::cmd_solve(&cfg, &bytes, out.as_deref(), allow_no_guarantee)?;
            println!(
                "solve: {} iterations, final theta {:e}, {} violation(s)",
                artifacts.iterations, artifacts.final_theta, artifacts.violations
            );
            println!("history: {}", artifacts.history_csv.display());
            if let Some(cert) = artifacts.certification_json {
                println!("certification: {}", cert.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SimulateOde { config, out } => {
            let (cfg, bytes) = load(&config)?;
            let artifacts = runner::cmd_simulate_ode(&cfg, &bytes, out.as_deref())?;
            println!(
                "simulate-ode: {} samples, final value {:e}",
                artifacts.samples, artifacts.final_value
            );
            println!("trajectory: {}", artifacts.trajectory_csv.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, out } => {
            let outcome = runner::cmd_verify(&suite, &out)?;
            for r in &outcome.results {
                println!("{}", r.line());
            }
            println!("verdict: {}", outcome.verdict_json.display());
            if outcome.all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Command::Sweep { config, out, jobs, allow_no_guarantee } => {
            let (cfg, bytes) = load(&config)?;
            let outcome =
                runner::cmd_sweep(&cfg, &bytes, out.as_deref(), jobs, allow_no_guarantee)?;
            println!(
                "sweep: {} cells, {} failed",
                outcome.cells, outcome.failed_cells
            );
            println!("summary: {}", outcome.summary_csv.display());
            Ok(ExitCode::SUCCESS)
        }
    }
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
