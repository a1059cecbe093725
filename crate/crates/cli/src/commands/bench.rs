//! `bench`: wall-clock per pipeline phase on synthetic data, plus the
//! per-record explanation cost and the coalition-evaluation count.

use std::time::Instant;

use countyvax::forest::train_forest;
use countyvax::metrics::compare_models;
use countyvax::ols::fit_wls;
use countyvax::seed::derive_seed;
use countyvax::shap::batch_explain;

use crate::config::{
    resolve_forest_config, resolve_seed, seed_tags, CliError, FileConfig, ForestFlags,
};
use crate::synth::interaction_frame;

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Synthetic rows to generate.
    #[arg(long, default_value_t = 200)]
    pub rows: usize,

    /// Number of predictors.
    #[arg(long, default_value_t = 7)]
    pub features: usize,

    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub forest: ForestFlags,
}

pub fn run(args: BenchArgs, file: &FileConfig) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed, file);
    let mut config = resolve_forest_config(&args.forest, file, derive_seed(seed, seed_tags::FOREST));
    if args.forest.trees.is_none() && file.trees.is_none() {
        config.n_trees = 200; // desk-scale default for the benchmark
    }
    config
        .validate(args.features)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let phase = |label: &str, secs: f64| println!("{label:<28}{secs:>10.3}s");

    let t = Instant::now();
    let frame = interaction_frame(args.rows, args.features, derive_seed(seed, seed_tags::BENCH_DATA), 0.02);
    phase("synthesize data", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let ols = fit_wls(&frame)?;
    phase("fit wls", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let forest = train_forest(&frame, &config)?;
    phase(
        &format!("train forest ({} trees)", config.n_trees),
        t.elapsed().as_secs_f64(),
    );

    let t = Instant::now();
    let comparison = compare_models(&ols, &forest, &frame, false)?;
    phase("evaluate both models", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let batch = batch_explain(&forest, &frame)?;
    let explain_secs = t.elapsed().as_secs_f64();
    phase(
        &format!("batch explain ({} rows)", args.rows),
        explain_secs,
    );

    let evals = batch
        .explanations
        .first()
        .map(|e| e.coalition_evals)
        .unwrap_or(0);
    let max_gap = batch
        .explanations
        .iter()
        .map(|e| e.additivity_gap().abs())
        .fold(0.0_f64, f64::max);
    println!(
        "{:<28}{:>10.3}ms",
        "per record",
        1e3 * explain_secs / args.rows.max(1) as f64
    );
    println!("{:<28}{evals:>11}", "coalition evals per record");
    println!("{:<28}{max_gap:>11.2e}", "max additivity gap");
    println!(
        "{:<28}{:>11.4} / {:.4}",
        "training-set mae (ols/rf)", comparison.ols.mae, comparison.forest.mae
    );
    Ok(())
}
