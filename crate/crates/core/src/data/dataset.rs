//! The validated county table, its CSV loader/writer, the seeded
//! train/test split, and invariant validation.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::frame::KeyedFrame;
use crate::data::model_frame::ModelFrame;
use crate::data::record::{normalize_fips, CountyRecord, PREDICTORS, TARGET, WEIGHT};
use crate::data::report::{Exclusion, Finding, LoadReport, ValidationReport};
use crate::data::schema::{Schema, ShareScale, OPTIONAL_FIELDS, REQUIRED_FIELDS};
use crate::error::{Error, Result};

/// Canonical column order used when writing a dataset back to CSV.
pub const CANONICAL_COLUMNS: [&str; 13] = [
    "fips",
    "name",
    "state",
    "perc_full_vac",
    "perc_food_st",
    "perc_asian",
    "perc_hisp",
    "perc_black",
    "perc_old65",
    "perc_young25",
    "perc_rep",
    "pop_adult",
    "pop_total",
];

/// Ordered county records plus the schema they were loaded under and the
/// source paths they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<CountyRecord>,
    schema: Schema,
    provenance: Vec<String>,
}

/// A loaded dataset together with its exclusion report.
#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub dataset: Dataset,
    pub report: LoadReport,
}

/// Split parameters: the held-out fraction and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Dataset {
    /// Wrap records without validating them (see [`Dataset::validate`]).
    pub fn from_records(records: Vec<CountyRecord>, provenance: Vec<String>) -> Dataset {
        Dataset {
            records,
            schema: Schema::default(),
            provenance,
        }
    }

    /// Load a CSV file under a schema. Rows violating record invariants,
    /// rows with missing values, and duplicate-fips rows are excluded and
    /// reported; unparseable numeric cells and missing required columns
    /// abort the load.
    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<LoadOutcome> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)?;
        let headers: Vec<String> = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            rows.push(record.iter().map(|c| c.to_string()).collect::<Vec<_>>());
        }
        build_dataset(
            &headers,
            rows,
            schema,
            vec![path.display().to_string()],
        )
    }

    /// Turn a merged raw frame into a dataset under a schema. The frame's
    /// key becomes the fips column.
    pub fn from_frame(frame: &KeyedFrame, schema: &Schema) -> Result<LoadOutcome> {
        let fips_alias = schema.alias("fips").unwrap_or("fips").to_string();
        let mut headers = vec![fips_alias];
        headers.extend(frame.columns().iter().cloned());
        let rows: Vec<Vec<String>> = frame
            .rows()
            .iter()
            .map(|(key, cells)| {
                let mut row = Vec::with_capacity(cells.len() + 1);
                row.push(key.clone());
                row.extend(cells.iter().cloned());
                row
            })
            .collect();
        build_dataset(&headers, rows, schema, vec![frame.label().to_string()])
    }

    /// Write the dataset in canonical column order. A written dataset
    /// reloads value-identically under the default schema.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(CANONICAL_COLUMNS)?;
        for r in &self.records {
            writer.write_record([
                r.fips.as_str(),
                r.name.as_str(),
                r.state.as_str(),
                &format!("{}", r.perc_full_vac),
                &format!("{}", r.perc_food_st),
                &format!("{}", r.perc_asian),
                &format!("{}", r.perc_hisp),
                &format!("{}", r.perc_black),
                &format!("{}", r.perc_old65),
                &format!("{}", r.perc_young25),
                &format!("{}", r.perc_rep),
                &format!("{}", r.pop_adult),
                &format!("{}", r.pop_total),
            ])?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn rows(&self) -> &[CountyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn find(&self, fips: &str) -> Option<&CountyRecord> {
        self.records.iter().find(|r| r.fips == fips)
    }

    /// List every invariant violation with the offending row's identity.
    /// The dataset itself is never modified.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut seen: HashSet<&str> = HashSet::with_capacity(self.records.len());
        for r in &self.records {
            for (field, message) in r.violations() {
                report.findings.push(Finding {
                    fips: r.fips.clone(),
                    field,
                    message,
                });
            }
            if !seen.insert(r.fips.as_str()) {
                report.findings.push(Finding {
                    fips: r.fips.clone(),
                    field: "fips".to_string(),
                    message: "duplicate fips".to_string(),
                });
            }
        }
        report
    }

    /// Deterministic seeded partition. The first ⌊N·(1−test_fraction)⌋ rows
    /// of a seeded shuffle form the training set; each side keeps the
    /// original row order.
    pub fn train_test_split(&self, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
        if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "test_fraction must be in (0, 1), got {}",
                spec.test_fraction
            )));
        }
        if self.records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = self.records.len();
        let n_train = ((n as f64) * (1.0 - spec.test_fraction)).floor() as usize;
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        indices.shuffle(&mut rng);
        let mut train_idx: Vec<usize> = indices[..n_train].to_vec();
        let mut test_idx: Vec<usize> = indices[n_train..].to_vec();
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        let pick = |idx: &[usize]| -> Dataset {
            Dataset {
                records: idx.iter().map(|&i| self.records[i].clone()).collect(),
                schema: self.schema.clone(),
                provenance: self.provenance.clone(),
            }
        };
        Ok((pick(&train_idx), pick(&test_idx)))
    }

    /// Extract the numeric modeling view for the given columns.
    pub fn model_frame(
        &self,
        predictors: &[&str],
        target: &str,
        weight: &str,
    ) -> Result<ModelFrame> {
        let lookup = |r: &CountyRecord, name: &str| -> Result<f64> {
            r.numeric(name).ok_or_else(|| Error::UnknownColumn {
                name: name.to_string(),
            })
        };
        let mut rows = Vec::with_capacity(self.records.len());
        let mut targets = Vec::with_capacity(self.records.len());
        let mut weights = Vec::with_capacity(self.records.len());
        let mut ids = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let mut row = Vec::with_capacity(predictors.len());
            for p in predictors {
                row.push(lookup(r, p)?);
            }
            rows.push(row);
            targets.push(lookup(r, target)?);
            weights.push(lookup(r, weight)?);
            ids.push(r.fips.clone());
        }
        ModelFrame::new(
            predictors.iter().map(|p| p.to_string()).collect(),
            rows,
            targets,
            weights,
            Some(ids),
        )
    }

    /// The canonical modeling view: seven predictors, vaccination-rate
    /// target, adult-population weight.
    pub fn canonical_model_frame(&self) -> Result<ModelFrame> {
        self.model_frame(&PREDICTORS, TARGET, WEIGHT)
    }
}

/// Cell conventions treated as a missing value (row excluded, not an error).
fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("n/a")
        || c.eq_ignore_ascii_case("null")
}

fn build_dataset(
    headers: &[String],
    rows: Vec<Vec<String>>,
    schema: &Schema,
    provenance: Vec<String>,
) -> Result<LoadOutcome> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let find_column = |field: &str| -> Option<usize> {
        let alias = schema.alias(field)?;
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(alias))
    };
    let mut required_idx = Vec::with_capacity(REQUIRED_FIELDS.len());
    for field in REQUIRED_FIELDS {
        let idx = find_column(field).ok_or_else(|| Error::MissingColumn {
            name: schema.alias(field).unwrap_or(field).to_string(),
        })?;
        required_idx.push((field, idx));
    }
    // Optional fields: a declared alias may be missing from the header, in
    // which case the default applies.
    let optional_idx: Vec<(&str, Option<usize>)> = OPTIONAL_FIELDS
        .iter()
        .map(|&field| (field, find_column(field)))
        .collect();

    let mut records = Vec::with_capacity(rows.len());
    let mut report = LoadReport::default();
    let mut seen: HashSet<String> = HashSet::with_capacity(rows.len());

    'rows: for (i, cells) in rows.iter().enumerate() {
        let row_no = i + 1;
        let cell = |idx: usize| cells.get(idx).map(|c| c.trim()).unwrap_or("");

        let exclude = |fips: Option<String>, reason: String, report: &mut LoadReport| {
            report.excluded.push(Exclusion {
                row: row_no,
                fips,
                reason,
            });
        };

        // fips first so exclusions can carry the row identity.
        let fips_idx = required_idx[0].1;
        let raw_fips = cell(fips_idx);
        let fips = match normalize_fips(raw_fips) {
            Some(f) => f,
            None => {
                exclude(
                    None,
                    format!("invalid fips `{raw_fips}`"),
                    &mut report,
                );
                continue;
            }
        };

        let numeric = |field: &str, idx: usize| -> Result<Option<f64>> {
            let c = cell(idx);
            if is_missing(c) {
                return Ok(None);
            }
            let parsed: f64 = c.parse().map_err(|_| Error::BadCell {
                row: row_no,
                column: schema.alias(field).unwrap_or(field).to_string(),
                value: c.to_string(),
            })?;
            Ok(Some(parsed))
        };

        let mut values = Vec::with_capacity(required_idx.len() - 1);
        for &(field, idx) in &required_idx[1..] {
            match numeric(field, idx)? {
                Some(v) => values.push(v),
                None => {
                    exclude(
                        Some(fips.clone()),
                        format!("missing value in `{field}`"),
                        &mut report,
                    );
                    continue 'rows;
                }
            }
        }
        let scale = |v: f64| match schema.scale {
            ShareScale::Fraction => v,
            ShareScale::Percent => v / 100.0,
        };
        // REQUIRED_FIELDS order: fips, target, seven predictors, pop_adult.
        let pop_adult = values[8];
        let mut name = String::new();
        let mut state = String::new();
        let mut pop_total = pop_adult;
        for &(field, idx) in &optional_idx {
            let Some(idx) = idx else { continue };
            match field {
                "name" => name = cell(idx).to_string(),
                "state" => state = cell(idx).to_string(),
                "pop_total" => {
                    if let Some(v) = numeric(field, idx)? {
                        pop_total = v;
                    }
                }
                _ => unreachable!(),
            }
        }
        let record = CountyRecord {
            fips: fips.clone(),
            name,
            state,
            perc_full_vac: scale(values[0]),
            perc_food_st: scale(values[1]),
            perc_asian: scale(values[2]),
            perc_hisp: scale(values[3]),
            perc_black: scale(values[4]),
            perc_old65: scale(values[5]),
            perc_young25: scale(values[6]),
            perc_rep: scale(values[7]),
            pop_adult,
            pop_total,
        };
        let violations = record.violations();
        if !violations.is_empty() {
            let reasons: Vec<String> = violations
                .into_iter()
                .map(|(field, msg)| format!("{field}: {msg}"))
                .collect();
            exclude(Some(fips), reasons.join("; "), &mut report);
            continue;
        }
        if !seen.insert(fips.clone()) {
            exclude(Some(fips), "duplicate fips".to_string(), &mut report);
            continue;
        }
        records.push(record);
    }

    report.loaded = records.len();
    Ok(LoadOutcome {
        dataset: Dataset {
            records,
            schema: schema.clone(),
            provenance,
        },
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn synth_record(i: usize) -> CountyRecord {
        // Deterministic spread of valid values across rows.
        let f = |k: usize| ((i * 7 + k * 13) % 97) as f64 / 120.0;
        CountyRecord {
            fips: format!("{:05}", 1000 + i),
            name: format!("County {i}"),
            state: "XX".to_string(),
            perc_full_vac: 0.3 + f(1) * 0.5,
            perc_food_st: f(2) * 0.4,
            perc_asian: f(3) * 0.3,
            perc_hisp: f(4) * 0.3,
            perc_black: f(5) * 0.3,
            perc_old65: f(6) * 0.4,
            perc_young25: f(7) * 0.3,
            perc_rep: 0.2 + f(8) * 0.6,
            pop_adult: 1000.0 + (i as f64) * 37.0,
            pop_total: 1300.0 + (i as f64) * 41.0,
        }
    }

    fn synth_dataset(n: usize) -> Dataset {
        Dataset::from_records((0..n).map(synth_record).collect(), vec!["synthetic".into()])
    }

    fn csv_text(records: &[CountyRecord]) -> String {
        let mut out = CANONICAL_COLUMNS.join(",") + "\n";
        for r in records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.fips,
                r.name.replace(',', " "),
                r.state,
                r.perc_full_vac,
                r.perc_food_st,
                r.perc_asian,
                r.perc_hisp,
                r.perc_black,
                r.perc_old65,
                r.perc_young25,
                r.perc_rep,
                r.pop_adult,
                r.pop_total
            ));
        }
        out
    }

    fn load_text(text: &str, schema: &Schema) -> Result<LoadOutcome> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, text).unwrap();
        Dataset::load_csv(&path, schema)
    }

    #[test]
    fn loads_the_full_county_count() {
        let records: Vec<CountyRecord> = (0..2630).map(synth_record).collect();
        let outcome = load_text(&csv_text(&records), &Schema::default()).unwrap();
        assert_eq!(outcome.dataset.len(), 2630);
        assert_eq!(outcome.report.excluded_count(), 0);
    }

    #[test]
    fn empty_file_is_an_error() {
        let text = CANONICAL_COLUMNS.join(",") + "\n";
        assert!(matches!(
            load_text(&text, &Schema::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn out_of_range_row_is_excluded_and_reported() {
        let mut records: Vec<CountyRecord> = (0..10).map(synth_record).collect();
        records[4].perc_black = 1.2;
        let outcome = load_text(&csv_text(&records), &Schema::default()).unwrap();
        assert_eq!(outcome.dataset.len(), 9);
        assert_eq!(outcome.report.excluded_count(), 1);
        assert_eq!(outcome.report.excluded[0].row, 5);
        assert!(outcome.report.excluded[0].reason.contains("perc_black"));
    }

    #[test]
    fn missing_required_column_is_an_error() {
        let text = "fips,perc_full_vac\n01001,0.5\n";
        assert!(matches!(
            load_text(text, &Schema::default()),
            Err(Error::MissingColumn { .. })
        ));
    }

    #[test]
    fn unparseable_cell_reports_row_number() {
        let mut records: Vec<CountyRecord> = (0..3).map(synth_record).collect();
        records[1].name = "x".to_string();
        let mut text = csv_text(&records);
        text = text.replace(&format!("{}", records[1].perc_rep), "not-a-number");
        let err = load_text(&text, &Schema::default()).unwrap_err();
        match err {
            Error::BadCell { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "perc_rep");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_value_excludes_the_row() {
        let records: Vec<CountyRecord> = (0..3).map(synth_record).collect();
        let mut text = csv_text(&records);
        text = text.replace(&format!("{}", records[1].perc_rep), "NA");
        let outcome = load_text(&text, &Schema::default()).unwrap();
        assert_eq!(outcome.dataset.len(), 2);
        assert!(outcome.report.excluded[0].reason.contains("missing value"));
    }

    #[test]
    fn percent_scale_divides_shares_only() {
        let text = "fips,perc_full_vac,perc_food_st,perc_asian,perc_hisp,perc_black,\
                    perc_old65,perc_young25,perc_rep,pop_adult\n\
                    01001,71.6,3.0,20.3,4.0,1.6,15.0,7.0,45.0,2500\n";
        let schema = Schema::parse("scale = percent\nname = -\nstate = -\npop_total = -\n").unwrap();
        let outcome = load_text(text, &schema).unwrap();
        let r = &outcome.dataset.rows()[0];
        assert!((r.perc_full_vac - 0.716).abs() < 1e-12);
        assert!((r.perc_rep - 0.45).abs() < 1e-12);
        assert_eq!(r.pop_adult, 2500.0);
        assert_eq!(r.pop_total, 2500.0);
    }

    #[test]
    fn headers_match_case_insensitively_and_fips_is_padded() {
        let text = "FIPS,Perc_Full_Vac,Perc_Food_St,Perc_Asian,Perc_Hisp,Perc_Black,\
                    Perc_Old65,Perc_Young25,Perc_Rep,Pop_Adult\n\
                    1001,0.5,0.1,0.1,0.1,0.1,0.1,0.1,0.5,2000\n";
        let outcome = load_text(text, &Schema::default()).unwrap();
        assert_eq!(outcome.dataset.rows()[0].fips, "01001");
    }

    #[test]
    fn duplicate_fips_rows_are_excluded() {
        let mut records: Vec<CountyRecord> = (0..3).map(synth_record).collect();
        records[2].fips = records[0].fips.clone();
        let outcome = load_text(&csv_text(&records), &Schema::default()).unwrap();
        assert_eq!(outcome.dataset.len(), 2);
        assert!(outcome.report.excluded[0].reason.contains("duplicate"));
    }

    #[test]
    fn csv_round_trip_is_value_identical() {
        let ds = synth_dataset(25);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        ds.write_csv(&path).unwrap();
        let reloaded = Dataset::load_csv(&path, &Schema::default()).unwrap();
        assert_eq!(reloaded.dataset.rows(), ds.rows());
    }

    #[test]
    fn split_sizes_match_the_paper_partition() {
        let ds = synth_dataset(2630);
        for seed in [0_u64, 1, 42] {
            let (train, test) = ds
                .train_test_split(&SplitSpec {
                    test_fraction: 0.149,
                    seed,
                })
                .unwrap();
            assert_eq!(train.len(), 2238);
            assert_eq!(test.len(), 392);
        }
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let ds = synth_dataset(100);
        let spec = SplitSpec {
            test_fraction: 0.3,
            seed: 7,
        };
        let (a1, b1) = ds.train_test_split(&spec).unwrap();
        let (a2, b2) = ds.train_test_split(&spec).unwrap();
        assert_eq!(a1.rows(), a2.rows());
        assert_eq!(b1.rows(), b2.rows());
    }

    #[test]
    fn different_seeds_differ_somewhere() {
        let ds = synth_dataset(100);
        let mut differing_pairs = 0;
        for s in 0..10_u64 {
            let (a1, _) = ds
                .train_test_split(&SplitSpec {
                    test_fraction: 0.3,
                    seed: s,
                })
                .unwrap();
            let (a2, _) = ds
                .train_test_split(&SplitSpec {
                    test_fraction: 0.3,
                    seed: s + 1000,
                })
                .unwrap();
            if a1.rows() != a2.rows() {
                differing_pairs += 1;
            }
        }
        assert_eq!(differing_pairs, 10);
    }

    #[test]
    fn split_partitions_are_disjoint_and_exhaustive() {
        let ds = synth_dataset(101);
        let (train, test) = ds
            .train_test_split(&SplitSpec {
                test_fraction: 0.25,
                seed: 3,
            })
            .unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        let train_keys: HashSet<&str> = train.rows().iter().map(|r| r.fips.as_str()).collect();
        for r in test.rows() {
            assert!(!train_keys.contains(r.fips.as_str()));
        }
        let mut all: Vec<&str> = train
            .rows()
            .iter()
            .chain(test.rows())
            .map(|r| r.fips.as_str())
            .collect();
        all.sort_unstable();
        let mut expected: Vec<&str> = ds.rows().iter().map(|r| r.fips.as_str()).collect();
        expected.sort_unstable();
        assert_eq!(all, expected);
    }

    #[test]
    fn bad_fraction_is_rejected() {
        let ds = synth_dataset(10);
        for f in [0.0, 1.0, -0.5, 1.5] {
            assert!(matches!(
                ds.train_test_split(&SplitSpec {
                    test_fraction: f,
                    seed: 0
                }),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn validate_reports_each_violation() {
        let mut records: Vec<CountyRecord> = (0..3).map(synth_record).collect();
        records[1].pop_adult = 0.0;
        let ds = Dataset::from_records(records, vec![]);
        let report = ds.validate();
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].field, "pop_adult");
        assert_eq!(report.findings[0].fips, ds.rows()[1].fips);
    }

    #[test]
    fn validate_clean_dataset_is_empty() {
        assert!(synth_dataset(5).validate().is_clean());
    }

    #[test]
    fn validate_flags_race_share_overflow() {
        let mut records: Vec<CountyRecord> = (0..1).map(synth_record).collect();
        records[0].perc_asian = 0.50;
        records[0].perc_hisp = 0.35;
        records[0].perc_black = 0.20;
        let ds = Dataset::from_records(records, vec![]);
        let report = ds.validate();
        assert_eq!(report.findings.len(), 1);
        assert!(report.findings[0].field.contains("perc_asian"));
    }

    #[test]
    fn model_frame_extracts_by_name() {
        let ds = synth_dataset(4);
        let frame = ds.canonical_model_frame().unwrap();
        assert_eq!(frame.n_rows(), 4);
        assert_eq!(frame.n_features(), 7);
        assert_eq!(frame.value(2, 6), ds.rows()[2].perc_rep);
        assert_eq!(frame.target()[1], ds.rows()[1].perc_full_vac);
        assert_eq!(frame.weight()[3], ds.rows()[3].pop_adult);
        assert_eq!(frame.ids()[0], ds.rows()[0].fips);
        assert!(matches!(
            ds.model_frame(&["nope"], TARGET, WEIGHT),
            Err(Error::UnknownColumn { .. })
        ));
    }
}
