//! Batch verification runner: executes estimator/oracle experiments from a
//! TOML config and writes machine-readable CSV tables.
//!
//! Exit codes: 0 when every requested check passes, 1 on a statistical
//! failure (a z-score above 4, or a nonzero variance where exactness is
//! required), 2 on configuration or numeric-setup errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use steingrad_cli::{config, runner};

#[derive(Parser)]
#[command(
    name = "steingrad",
    version,
    about = "Gradient-identity verification runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run estimators (optionally against oracles) and emit result rows.
    Run {
        /// Experiment config file (TOML).
        config: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report per-sample term variances of estimators sharing a target.
    CompareVariance {
        /// Experiment config file (TOML).
        config: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_experiment(
    path: &PathBuf,
    seed: Option<u64>,
) -> Result<config::Experiment, config::ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config::ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut exp = config::parse(&text)?;
    if let Some(seed) = seed {
        exp.seed = seed;
    }
    Ok(exp)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed } => run_command(&config, &out, seed),
        Command::CompareVariance { config, out, seed } => compare_command(&config, &out, seed),
    };
    ExitCode::from(code)
}

fn run_command(path: &PathBuf, out: &Option<PathBuf>, seed: Option<u64>) -> u8 {
    let exp = match load_experiment(path, seed) {
        Ok(exp) => exp,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    match runner::run_experiment(&exp) {
        Ok((rows, all_ok)) => {
            let rendered = runner::render_results(&rows);
            if let Err(e) = write_output(out, &rendered) {
                eprintln!("cannot write output: {e}");
                return 2;
            }
            if all_ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            2
        }
    }
}

fn compare_command(path: &PathBuf, out: &Option<PathBuf>, seed: Option<u64>) -> u8 {
    let exp = match load_experiment(path, seed) {
        Ok(exp) => exp,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    // The comparison is meaningless unless at least two estimators report
    // against the same target.
    let targets: Vec<&str> = exp
        .estimators
        .iter()
        .map(|id| runner::estimator_target_label(id))
        .collect();
    let shared = targets
        .iter()
        .any(|t| targets.iter().filter(|u| *u == t).count() >= 2);
    if !shared {
        eprintln!("config error: compare-variance needs at least two estimators sharing a target");
        return 2;
    }
    match runner::compare_variance(&exp) {
        Ok((rows, ok)) => {
            let rendered = runner::render_variances(&rows);
            if let Err(e) = write_output(out, &rendered) {
                eprintln!("cannot write output: {e}");
                return 2;
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("compare-variance failed: {e}");
            2
        }
    }
}
