//! `evaluate`: seeded split, train both models on the training rows,
//! compare MAE and r² on the held-out rows.

use std::path::PathBuf;

use anyhow::Context;
use countyvax::data::{Dataset, SplitSpec, TARGET};
use countyvax::forest::train_forest;
use countyvax::metrics::compare_models;
use countyvax::ols::fit_wls_named;
use countyvax::seed::derive_seed;

use crate::commands::{ensure_out_dir, write_text};
use crate::config::{
    resolve_forest_config, resolve_schema, resolve_seed, resolve_test_fraction, seed_tags,
    CliError, FileConfig, ForestFlags,
};

/// Held-out share used when no fraction is given; 2630 rows then split
/// into 2238 training and 392 testing rows.
const DEFAULT_TEST_FRACTION: f64 = 0.149;

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Canonical dataset CSV.
    #[arg(long)]
    pub data: PathBuf,

    /// Schema file for non-canonical column names.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    /// Optional output directory for comparison.json.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Master seed for the split and the forest.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Held-out fraction (default 0.149).
    #[arg(long = "test-fraction")]
    pub test_fraction: Option<f64>,

    /// Weight the test metrics by adult population instead of 1/N.
    #[arg(long = "weighted-metrics")]
    pub weighted_metrics: bool,

    #[command(flatten)]
    pub forest: ForestFlags,
}

pub fn run(args: EvaluateArgs, file: &FileConfig) -> Result<(), CliError> {
    let schema = resolve_schema(&args.schema)?;
    let seed = resolve_seed(args.seed, file);
    let fraction = resolve_test_fraction(args.test_fraction, file, DEFAULT_TEST_FRACTION);

    let outcome = Dataset::load_csv(&args.data, &schema)
        .with_context(|| format!("loading {}", args.data.display()))?;
    let spec = SplitSpec {
        test_fraction: fraction,
        seed: derive_seed(seed, seed_tags::SPLIT),
    };
    let (train, test) = outcome.dataset.train_test_split(&spec)?;
    println!("split: {} train / {} test rows", train.len(), test.len());

    let train_frame = train.canonical_model_frame()?;
    let test_frame = test.canonical_model_frame()?;

    let ols_fit = fit_wls_named(&train_frame, TARGET)?;
    let config = resolve_forest_config(&args.forest, file, derive_seed(seed, seed_tags::FOREST));
    config
        .validate(train_frame.n_features())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let forest = train_forest(&train_frame, &config)?;

    let comparison = compare_models(&ols_fit, &forest, &test_frame, args.weighted_metrics)?;
    print!("{}", comparison.to_table());

    if let Some(out) = &args.out {
        ensure_out_dir(out)?;
        let json = serde_json::to_string_pretty(&comparison)
            .context("serializing the comparison")?;
        write_text(&out.join("comparison.json"), &json)?;
        write_text(&out.join("comparison.txt"), &comparison.to_table())?;
        println!("wrote {}", out.join("comparison.json").display());
    }
    Ok(())
}
