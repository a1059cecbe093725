//! Load, join, and validation reports: one finding per record, written as
//! JSON-lines so downstream tooling can consume them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One excluded input row and why it was dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    /// 1-based data-row number in the source (header not counted).
    pub row: usize,
    pub fips: Option<String>,
    pub reason: String,
}

/// Outcome of a load: how many rows were kept and which were excluded.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub loaded: usize,
    pub excluded: Vec<Exclusion>,
}

impl LoadReport {
    pub fn excluded_count(&self) -> usize {
        self.excluded.len()
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        write_jsonl(path, &self.excluded)
    }
}

/// Inner-join outcome: matched row count plus the keys dropped per side.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JoinReport {
    pub matched: usize,
    pub left_only: Vec<String>,
    pub right_only: Vec<String>,
}

/// One finding of a join report, flattened for JSON-lines output.
#[derive(Debug, Serialize)]
pub struct JoinFinding<'a> {
    pub join: &'a str,
    pub side: &'static str,
    pub fips: &'a str,
}

impl JoinReport {
    pub fn findings<'a>(&'a self, join: &'a str) -> Vec<JoinFinding<'a>> {
        let mut out = Vec::with_capacity(self.left_only.len() + self.right_only.len());
        for fips in &self.left_only {
            out.push(JoinFinding {
                join,
                side: "left_only",
                fips,
            });
        }
        for fips in &self.right_only {
            out.push(JoinFinding {
                join,
                side: "right_only",
                fips,
            });
        }
        out
    }
}

/// One dataset invariant violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub fips: String,
    pub field: String,
    pub message: String,
}

/// Result of validating a dataset; empty findings means clean.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        write_jsonl(path, &self.findings)
    }
}

/// Write serializable records as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
