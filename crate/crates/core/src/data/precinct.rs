//! Precinct-to-county aggregation of two-party presidential votes.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::frame::{frame_from_map, KeyedFrame};
use crate::data::record::normalize_fips;
use crate::error::{Error, Result};

/// One precinct's two-party vote counts, already tagged with its county.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecinctRow {
    pub fips: String,
    pub dem_votes: u64,
    pub rep_votes: u64,
}

/// Aggregation result: Republican share of the two-party vote per county,
/// plus the counties omitted because they recorded no two-party votes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrecinctAggregate {
    pub perc_rep: BTreeMap<String, f64>,
    pub omitted: Vec<String>,
}

impl PrecinctAggregate {
    pub fn to_frame(&self, column: &str) -> KeyedFrame {
        frame_from_map("precinct aggregate", column, &self.perc_rep)
    }
}

/// Sum precinct votes per county and compute the Republican share of the
/// two-party total. Third-party votes never enter; counties whose two-party
/// total is zero are omitted and listed. Votes are accumulated as integers
/// and divided once, so the result is exact and order-independent.
pub fn aggregate_precincts(rows: &[PrecinctRow]) -> PrecinctAggregate {
    let mut totals: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for row in rows {
        let entry = totals.entry(row.fips.as_str()).or_insert((0, 0));
        entry.0 += row.rep_votes;
        entry.1 += row.dem_votes;
    }
    let mut agg = PrecinctAggregate::default();
    for (fips, (rep, dem)) in totals {
        let two_party = rep + dem;
        if two_party == 0 {
            agg.omitted.push(fips.to_string());
        } else {
            agg.perc_rep
                .insert(fips.to_string(), rep as f64 / two_party as f64);
        }
    }
    agg
}

/// Read a pre-flattened precinct CSV with columns `fips,dem_votes,rep_votes`
/// (header matched case-insensitively). Vote cells must parse as
/// non-negative integers.
pub fn load_precinct_csv(path: impl AsRef<Path>) -> Result<Vec<PrecinctRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn {
                name: name.to_string(),
            })
    };
    let fips_idx = col("fips")?;
    let dem_idx = col("dem_votes")?;
    let rep_idx = col("rep_votes")?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        let raw_fips = record.get(fips_idx).unwrap_or("").to_string();
        let fips = normalize_fips(&raw_fips).unwrap_or(raw_fips);
        let parse = |idx: usize, column: &str| -> Result<u64> {
            let cell = record.get(idx).unwrap_or("").trim();
            cell.parse::<u64>().map_err(|_| Error::BadCell {
                row: row_no,
                column: column.to_string(),
                value: cell.to_string(),
            })
        };
        rows.push(PrecinctRow {
            fips,
            dem_votes: parse(dem_idx, "dem_votes")?,
            rep_votes: parse(rep_idx, "rep_votes")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(rows)
}
