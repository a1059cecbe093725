//! Operator CLI: ingest county data, fit the models, evaluate them on a
//! held-out split, export per-county Shapley explanations, and benchmark
//! the pipeline phases.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config error. All
//! randomness flows from `--seed`; outputs are byte-identical across runs
//! with the same inputs and seed (timing lives only in `*.log` files and
//! on stderr).

mod commands;
mod config;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{bench, evaluate, explain, fit, ingest};
use crate::config::{CliError, FileConfig};

#[derive(Parser)]
#[command(
    name = "countyvax",
    version,
    about = "County vaccination-rate modeling: weighted OLS, random forest, exact Shapley attributions"
)]
struct Cli {
    /// Key-value config file (flags take precedence over it).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for forest training and batch explanation.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the canonical dataset from county, precinct, and
    /// enrichment CSVs, with load and join reports.
    Ingest(ingest::IngestArgs),
    /// Fit the weighted OLS model and/or train the random forest.
    Fit(fit::FitArgs),
    /// Train both models on a seeded split and compare them on the
    /// held-out rows.
    Evaluate(evaluate::EvaluateArgs),
    /// Compute exact Shapley explanations from a trained forest.
    Explain(explain::ExplainArgs),
    /// Time the pipeline phases on synthetic data.
    Bench(bench::BenchArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(threads) = cli.threads.or(file_config.threads) {
        if threads < 1 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        // Ignore the error when a pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Ingest(args) => ingest::run(args, &file_config),
        Command::Fit(args) => fit::run(args, &file_config),
        Command::Evaluate(args) => evaluate::run(args, &file_config),
        Command::Explain(args) => explain::run(args, &file_config),
        Command::Bench(args) => bench::run(args, &file_config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
