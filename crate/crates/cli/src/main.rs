//! `ssgmix`: fit, simulate, classify and score mixtures of skewed
//! sub-Gaussian stable distributions from the command line.

mod commands;
mod error;
mod manifest;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{ClassifyArgs, EvalArgs, FitArgs, GridArgs, SimulateArgs};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ssgmix", version, about = "Mixtures of skewed sub-Gaussian stable distributions")]
struct Cli {
    /// Worker threads for the parallel E-step (default: all cores).
    #[arg(long, global = true, env = "SSGMIX_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a K-component mixture; writes model JSON, labels, trace and a manifest.
    Fit(FitArgs),
    /// Draw a labelled sample from a model file or a preset.
    Simulate(SimulateArgs),
    /// Evaluate a bivariate mixture density on a regular grid.
    DensityGrid(GridArgs),
    /// Assign rows to components by maximum responsibility.
    Classify(ClassifyArgs),
    /// Adjusted Rand index of two labelings, or log-likelihood and BIC of a model.
    Eval(EvalArgs),
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::DensityGrid(a) => commands::density_grid(a),
        Command::Classify(a) => commands::classify(a),
        Command::Eval(a) => commands::eval(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
