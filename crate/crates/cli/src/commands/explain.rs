//! `explain`: exact Shapley explanations from a trained forest — one
//! JSON-lines record per county plus one scatter CSV per predictor
//! (feature value, SHAP value, fips), the data behind the per-county bar
//! charts and the all-county scatter panels.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use countyvax::data::{Dataset, ModelFrame, TARGET, WEIGHT};
use countyvax::forest::Forest;
use countyvax::shap::{
    baseline, batch_explain_with_progress, format_decomposition, shap_values, ShapExplanation,
};
use serde::Serialize;

use crate::commands::{ensure_out_dir, write_text};
use crate::config::{resolve_schema, CliError, FileConfig};

#[derive(Debug, clap::Args)]
pub struct ExplainArgs {
    /// Trained forest model file (see `fit`).
    #[arg(long)]
    pub model: PathBuf,

    /// Canonical dataset CSV with the counties to explain.
    #[arg(long)]
    pub data: PathBuf,

    /// Schema file for non-canonical column names.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    /// Output directory for explanations.jsonl and the scatter files.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Explain one county and print its decomposition.
    #[arg(long)]
    pub fips: Option<String>,
}

#[derive(Serialize)]
struct FeatureAttribution<'a> {
    name: &'a str,
    value: f64,
    shap: f64,
}

#[derive(Serialize)]
struct ExplanationRecord<'a> {
    fips: &'a str,
    baseline: f64,
    prediction: f64,
    features: Vec<FeatureAttribution<'a>>,
}

fn explanation_record<'a>(
    expl: &'a ShapExplanation,
    names: &'a [String],
    values: &'a [f64],
) -> ExplanationRecord<'a> {
    ExplanationRecord {
        fips: &expl.id,
        baseline: expl.baseline,
        prediction: expl.prediction,
        features: names
            .iter()
            .enumerate()
            .map(|(j, name)| FeatureAttribution {
                name,
                value: values[j],
                shap: expl.phi[j],
            })
            .collect(),
    }
}

fn write_explanations(
    path: &Path,
    frame: &ModelFrame,
    row_of: impl Fn(&str) -> Option<usize>,
    explanations: &[ShapExplanation],
) -> Result<(), CliError> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for expl in explanations {
        let row = row_of(&expl.id).expect("explanation id is a frame id");
        let record = explanation_record(expl, frame.feature_names(), frame.row(row));
        serde_json::to_writer(&mut w, &record).context("serializing an explanation")?;
        w.write_all(b"\n").context("writing explanations")?;
    }
    w.flush().context("flushing explanations")?;
    Ok(())
}

fn write_scatter_files(
    out: &Path,
    frame: &ModelFrame,
    row_of: impl Fn(&str) -> Option<usize>,
    explanations: &[ShapExplanation],
) -> Result<(), CliError> {
    for (j, name) in frame.feature_names().iter().enumerate() {
        let path = out.join(format!("scatter_{name}.csv"));
        let file =
            File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "value,shap,fips").context("writing scatter header")?;
        for expl in explanations {
            let row = row_of(&expl.id).expect("explanation id is a frame id");
            writeln!(w, "{},{},{}", frame.value(row, j), expl.phi[j], expl.id)
                .context("writing scatter row")?;
        }
        w.flush().context("flushing scatter file")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ExplainSummary {
    n_explained: usize,
    n_failed: usize,
    baseline: f64,
    weighted_target_mean: f64,
    baseline_gap: f64,
    coalition_evals_per_record: usize,
}

pub fn run(args: ExplainArgs, _file: &FileConfig) -> Result<(), CliError> {
    let schema = resolve_schema(&args.schema)?;
    let forest = Forest::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let outcome = Dataset::load_csv(&args.data, &schema)
        .with_context(|| format!("loading {}", args.data.display()))?;
    let dataset = outcome.dataset;

    let predictor_names: Vec<&str> =
        forest.feature_names().iter().map(|s| s.as_str()).collect();
    let frame = dataset.model_frame(&predictor_names, TARGET, WEIGHT)?;
    let row_of = |id: &str| frame.ids().iter().position(|x| x == id);

    let model_baseline = baseline(&forest)?;
    let weighted_mean = frame.weighted_target_mean();
    println!(
        "baseline v(empty) = {model_baseline:.6}; weighted target mean = {weighted_mean:.6}; \
         difference = {:+.6}",
        model_baseline - weighted_mean
    );

    if let Some(fips) = &args.fips {
        let record = dataset
            .find(fips)
            .ok_or_else(|| countyvax::Error::UnknownFips { fips: fips.clone() })?;
        let row = row_of(fips).expect("record found implies frame row");
        let mut expl = shap_values(&forest, frame.row(row))?;
        expl.id = fips.clone();
        let header = if record.name.is_empty() {
            format!("county {fips}")
        } else {
            format!("{}, {} ({fips})", record.name, record.state)
        };
        print!(
            "{}",
            format_decomposition(
                &expl,
                forest.feature_names(),
                Some(frame.row(row)),
                &header
            )
        );
        if let Some(out) = &args.out {
            ensure_out_dir(out)?;
            let path = out.join("explanations.jsonl");
            write_explanations(&path, &frame, row_of, std::slice::from_ref(&expl))?;
            println!("wrote {}", path.display());
        }
        return Ok(());
    }

    let total = frame.n_rows();
    let step = (total / 20).max(1);
    let progress = move |done: usize, all: usize| {
        if done.is_multiple_of(step) || done == all {
            eprintln!("explained {done}/{all}");
        }
    };
    let started = std::time::Instant::now();
    let batch = batch_explain_with_progress(&forest, &frame, &progress)?;
    eprintln!(
        "batch explanation took {:.2}s ({:.1} ms/record)",
        started.elapsed().as_secs_f64(),
        1e3 * started.elapsed().as_secs_f64() / total.max(1) as f64
    );
    for failure in &batch.failures {
        eprintln!(
            "row {} ({}): {}",
            failure.index, failure.id, failure.message
        );
    }

    let evals = batch
        .explanations
        .first()
        .map(|e| e.coalition_evals)
        .unwrap_or(0);
    println!(
        "explained {} rows ({} coalition evaluations per record)",
        batch.explanations.len(),
        evals
    );

    if let Some(out) = &args.out {
        ensure_out_dir(out)?;
        write_explanations(
            &out.join("explanations.jsonl"),
            &frame,
            row_of,
            &batch.explanations,
        )?;
        write_scatter_files(out, &frame, row_of, &batch.explanations)?;
        let summary = ExplainSummary {
            n_explained: batch.explanations.len(),
            n_failed: batch.failures.len(),
            baseline: model_baseline,
            weighted_target_mean: weighted_mean,
            baseline_gap: model_baseline - weighted_mean,
            coalition_evals_per_record: evals,
        };
        let json =
            serde_json::to_string_pretty(&summary).context("serializing the summary")?;
        write_text(&out.join("explain_summary.json"), &json)?;
        println!(
            "wrote {} and {} scatter files",
            out.join("explanations.jsonl").display(),
            frame.n_features()
        );
    }

    if !batch.failures.is_empty() {
        return Err(CliError::Runtime(anyhow!(
            "{} of {} rows failed to explain (outputs for the rest were written)",
            batch.failures.len(),
            total
        )));
    }
    Ok(())
}
