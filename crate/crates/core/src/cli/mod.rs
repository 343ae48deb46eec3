//! Command-line interface: scenario loading, the four subcommands
//! (`check`, `solve`, `simulate`, `compare`), and artifact export.
//!
//! Exit-code contract: `0` success, `1` analysis failure (an assumption
//! scan fails, the solver does not converge, or episodes run away),
//! `2` input error (unreadable or invalid scenario/artifact files).

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

/// Failures surfaced by CLI commands, split by exit code.
#[derive(Debug, Error)]
pub enum CmdError {
    /// Unreadable or invalid inputs (exit code 2).
    #[error("{0}")]
    Input(String),
    /// The analysis itself reported a failure (exit code 1).
    #[error("{0}")]
    Analysis(String),
}

impl CmdError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Input(_) => 2,
            CmdError::Analysis(_) => 1,
        }
    }
}

/// Measurement scheduling toolkit for noisy Markov chains.
#[derive(Debug, Parser)]
#[command(name = "lookout", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan the structural assumptions of a scenario and report each
    /// verdict.
    Check {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Shift constant for the transformed-cost checks (defaults to
        /// the scenario's value or the smallest admissible choice).
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the full report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for the optimal policy and export it.
    Solve {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Output stem: writes `<out>.json` and `<out>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the grid resolution.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the convergence tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Roll out a policy by Monte Carlo and report cost components.
    Simulate {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Policy source: `optimal`, `myopic-lower`, `myopic-upper`, or
        /// a policy artifact path.
        #[arg(long, default_value = "optimal")]
        policy: String,
        /// Number of episodes.
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        /// Base RNG seed (episode k uses stream k).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the grid resolution.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the solver tolerance (when solving for the policy).
        #[arg(long)]
        tol: Option<f64>,
        /// Shift constant for the `myopic-upper` policy.
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the summary as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two scenarios: cost dominance, mismatch norms, and the
    /// sensitivity bound.
    Compare {
        /// Scenario for the first model.
        scenario_a: PathBuf,
        /// Scenario for the second model.
        scenario_b: PathBuf,
        /// Override the grid resolution.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the solver tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the comparison as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Dispatches a parsed command line.
///
/// # Errors
///
/// Propagates each command's [`CmdError`]; the binary maps it to the
/// documented exit code.
pub fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Check {
            scenario,
            alpha,
            out,
        } => commands::cmd_check(&scenario, alpha, out.as_deref()),
        Command::Solve {
            scenario,
            out,
            grid,
            tol,
        } => commands::cmd_solve(&scenario, out.as_deref(), grid, tol),
        Command::Simulate {
            scenario,
            policy,
            runs,
            seed,
            grid,
            tol,
            alpha,
            out,
        } => commands::cmd_simulate(
            &scenario,
            &policy,
            runs,
            seed,
            grid,
            tol,
            alpha,
            out.as_deref(),
        ),
        Command::Compare {
            scenario_a,
            scenario_b,
            grid,
            tol,
            out,
        } => commands::cmd_compare(&scenario_a, &scenario_b, grid, tol, out.as_deref()),
    }
}
