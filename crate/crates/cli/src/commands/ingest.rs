//! `ingest`: assemble the canonical dataset from a county CSV plus
//! optional precinct votes and fips-keyed enrichment columns.

use std::path::PathBuf;

use anyhow::Context;
use countyvax::data::{
    aggregate_precincts, join_by_fips, load_precinct_csv, write_jsonl, Dataset, JoinReport,
    KeyedFrame,
};
use serde::Serialize;

use crate::commands::{ensure_out_dir, write_text};
use crate::config::{resolve_schema, CliError, FileConfig};

#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    /// County-level CSV; must contain the fips key column.
    #[arg(long)]
    pub counties: PathBuf,

    /// Pre-flattened precinct CSV with columns fips,dem_votes,rep_votes;
    /// aggregated to a county Republican two-party share and joined in.
    #[arg(long)]
    pub precincts: Option<PathBuf>,

    /// Additional fips-keyed CSV whose columns are joined in.
    #[arg(long)]
    pub enrichment: Option<PathBuf>,

    /// Schema file mapping canonical fields to column names.
    #[arg(long)]
    pub schema: Option<PathBuf>,

    /// Output directory for dataset.csv and the reports.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct OmittedCounty<'a> {
    fips: &'a str,
    reason: &'static str,
}

pub fn run(args: IngestArgs, _file: &FileConfig) -> Result<(), CliError> {
    let schema = resolve_schema(&args.schema)?;
    ensure_out_dir(&args.out)?;

    let fips_alias = schema.alias("fips").unwrap_or("fips").to_string();
    let mut merged = KeyedFrame::from_csv(&args.counties, &fips_alias)
        .with_context(|| format!("reading {}", args.counties.display()))?;
    println!("counties: {} rows from {}", merged.len(), args.counties.display());

    let mut joins: Vec<(String, JoinReport)> = Vec::new();

    if let Some(precincts_path) = &args.precincts {
        let rows = load_precinct_csv(precincts_path)
            .with_context(|| format!("reading {}", precincts_path.display()))?;
        let agg = aggregate_precincts(&rows);
        if !agg.omitted.is_empty() {
            let findings: Vec<OmittedCounty> = agg
                .omitted
                .iter()
                .map(|fips| OmittedCounty {
                    fips,
                    reason: "zero two-party votes",
                })
                .collect();
            write_jsonl(args.out.join("precinct_report.jsonl"), &findings)?;
            println!(
                "precincts: {} counties omitted (zero two-party votes)",
                agg.omitted.len()
            );
        }
        let rep_alias = schema.alias("perc_rep").unwrap_or("perc_rep");
        let frame = agg.to_frame(rep_alias);
        let (joined, report) = join_by_fips(&merged, &frame)?;
        println!(
            "join precincts: matched {}, left-only {}, right-only {}",
            report.matched,
            report.left_only.len(),
            report.right_only.len()
        );
        joins.push(("precincts".to_string(), report));
        merged = joined;
    }

    if let Some(enrichment_path) = &args.enrichment {
        let frame = KeyedFrame::from_csv(enrichment_path, &fips_alias)
            .with_context(|| format!("reading {}", enrichment_path.display()))?;
        let (joined, report) = join_by_fips(&merged, &frame)?;
        println!(
            "join enrichment: matched {}, left-only {}, right-only {}",
            report.matched,
            report.left_only.len(),
            report.right_only.len()
        );
        joins.push(("enrichment".to_string(), report));
        merged = joined;
    }

    let outcome = Dataset::from_frame(&merged, &schema)?;
    let dataset_path = args.out.join("dataset.csv");
    outcome.dataset.write_csv(&dataset_path)?;
    outcome
        .report
        .write_jsonl(args.out.join("load_report.jsonl"))?;

    let mut join_findings = Vec::new();
    for (name, report) in &joins {
        join_findings.extend(
            report
                .findings(name)
                .into_iter()
                .map(|f| serde_json::to_value(&f).expect("serializable finding")),
        );
    }
    write_jsonl(args.out.join("join_report.jsonl"), &join_findings)?;

    println!(
        "dataset: {} rows kept, {} excluded",
        outcome.dataset.len(),
        outcome.report.excluded_count()
    );
    println!("wrote {}", dataset_path.display());

    let summary = format!(
        "rows={}\nexcluded={}\njoins={}\n",
        outcome.dataset.len(),
        outcome.report.excluded_count(),
        joins.len()
    );
    write_text(&args.out.join("ingest_summary.txt"), &summary)?;
    Ok(())
}
