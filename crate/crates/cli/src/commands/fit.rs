//! `fit`: train the weighted OLS model and/or the random forest and
//! persist them. Deterministic for a fixed `--seed`: model files are
//! byte-identical across runs; timing goes to `train.log` and stderr.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use countyvax::data::{Dataset, SplitSpec, TARGET};
use countyvax::forest::train_forest_with_log;
use countyvax::ols::{fit_wls_named, summary_table};
use countyvax::seed::derive_seed;

use crate::commands::{ensure_out_dir, write_text};
use crate::config::{
    resolve_forest_config, resolve_schema, resolve_seed, seed_tags, CliError, FileConfig,
    ForestFlags,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelChoice {
    Ols,
    Forest,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct FitArgs {
    /// Canonical dataset CSV (see `ingest`).
    #[arg(long)]
    pub data: PathBuf,

    /// Schema file for non-canonical column names.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    /// Output directory for model files and the summary.
    #[arg(long)]
    pub out: PathBuf,

    /// Which models to fit.
    #[arg(long, value_enum, default_value_t = ModelChoice::Both)]
    pub model: ModelChoice,

    /// Master seed; every random stream derives from it.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Hold out this fraction and fit on the training partition only.
    /// Without it both models fit the full sample.
    #[arg(long = "test-fraction")]
    pub test_fraction: Option<f64>,

    #[command(flatten)]
    pub forest: ForestFlags,
}

pub fn run(args: FitArgs, file: &FileConfig) -> Result<(), CliError> {
    let schema = resolve_schema(&args.schema)?;
    let seed = resolve_seed(args.seed, file);
    ensure_out_dir(&args.out)?;

    let outcome = Dataset::load_csv(&args.data, &schema)
        .with_context(|| format!("loading {}", args.data.display()))?;
    if outcome.report.excluded_count() > 0 {
        eprintln!(
            "note: {} rows excluded during load",
            outcome.report.excluded_count()
        );
    }
    let validation = outcome.dataset.validate();
    if !validation.is_clean() {
        return Err(CliError::Runtime(anyhow!(
            "data validation failed with {} findings; aborting before training",
            validation.findings.len()
        )));
    }

    let fraction = args.test_fraction.or(file.test_fraction);
    let dataset = match fraction {
        None => outcome.dataset,
        Some(f) => {
            let spec = SplitSpec {
                test_fraction: f,
                seed: derive_seed(seed, seed_tags::SPLIT),
            };
            let (train, test) = outcome.dataset.train_test_split(&spec)?;
            println!("split: {} train / {} test rows", train.len(), test.len());
            train
        }
    };
    let frame = dataset.canonical_model_frame()?;

    if matches!(args.model, ModelChoice::Ols | ModelChoice::Both) {
        let fit = fit_wls_named(&frame, TARGET)?;
        let table = summary_table(&fit);
        print!("{table}");
        write_text(&args.out.join("ols_summary.txt"), &table)?;
        let json = serde_json::to_string_pretty(&fit)
            .context("serializing the ols fit")?;
        write_text(&args.out.join("ols.json"), &json)?;
        println!("wrote {}", args.out.join("ols.json").display());
    }

    if matches!(args.model, ModelChoice::Forest | ModelChoice::Both) {
        let config = resolve_forest_config(
            &args.forest,
            file,
            derive_seed(seed, seed_tags::FOREST),
        );
        config
            .validate(frame.n_features())
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let (forest, log) = train_forest_with_log(&frame, &config)?;
        let model_path = args.out.join("forest.json");
        forest.save(&model_path)?;
        let mut train_log = String::new();
        for (t, secs) in log.per_tree_seconds.iter().enumerate() {
            let _ = writeln!(train_log, "tree {t}: {:.6}s", secs);
        }
        let _ = writeln!(train_log, "total: {:.3}s", log.total_seconds);
        write_text(&args.out.join("train.log"), &train_log)?;
        eprintln!(
            "trained {} trees in {:.2}s",
            config.n_trees, log.total_seconds
        );
        println!("wrote {}", model_path.display());
    }

    Ok(())
}
