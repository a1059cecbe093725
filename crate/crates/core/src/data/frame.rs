//! Fips-keyed raw tables used while assembling the dataset from several
//! sources. Cells stay as text until the schema turns the merged frame
//! into typed records.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::data::record::normalize_fips;
use crate::data::report::JoinReport;
use crate::error::{Error, Result};

/// A columnar table keyed by fips. Row order is preserved from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyedFrame {
    label: String,
    columns: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

impl KeyedFrame {
    pub fn new(label: impl Into<String>, columns: Vec<String>) -> KeyedFrame {
        KeyedFrame {
            label: label.into(),
            columns,
            rows: Vec::new(),
        }
    }

    /// Read a CSV file, taking `key_column` (matched case-insensitively)
    /// as the fips key and keeping every other column as text.
    pub fn from_csv(path: impl AsRef<Path>, key_column: &str) -> Result<KeyedFrame> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let key_idx = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(key_column))
            .ok_or_else(|| Error::MissingColumn {
                name: key_column.to_string(),
            })?;
        let columns: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != key_idx)
            .map(|(_, h)| h.trim().to_string())
            .collect();
        let label = path.display().to_string();
        let mut frame = KeyedFrame::new(label, columns);
        for record in reader.records() {
            let record = record?;
            let raw_key = record.get(key_idx).unwrap_or("").to_string();
            let key = normalize_fips(&raw_key).unwrap_or(raw_key);
            let cells: Vec<String> = record
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != key_idx)
                .map(|(_, c)| c.trim().to_string())
                .collect();
            frame.push_row(key, cells)?;
        }
        Ok(frame)
    }

    pub fn push_row(&mut self, fips: String, cells: Vec<String>) -> Result<()> {
        if cells.len() != self.columns.len() {
            return Err(Error::InvalidConfig(format!(
                "frame `{}`: row for `{fips}` has {} cells, expected {}",
                self.label,
                cells.len(),
                self.columns.len()
            )));
        }
        self.rows.push((fips, cells));
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[(String, Vec<String>)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keys in row order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|(k, _)| k.as_str())
    }

    fn check_unique_keys(&self, side: &str) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.rows.len());
        for (key, _) in &self.rows {
            if !seen.insert(key.as_str()) {
                return Err(Error::DuplicateKey {
                    fips: key.clone(),
                    side: side.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Inner-join two frames on fips. Unmatched keys from each side are counted
/// and listed (sorted) in the report; duplicate keys on either side are an
/// error, as is a non-key column name present on both sides.
pub fn join_by_fips(left: &KeyedFrame, right: &KeyedFrame) -> Result<(KeyedFrame, JoinReport)> {
    left.check_unique_keys("left")?;
    right.check_unique_keys("right")?;
    for col in right.columns() {
        if left.columns.iter().any(|c| c.eq_ignore_ascii_case(col)) {
            return Err(Error::DuplicateColumn { name: col.clone() });
        }
    }

    let right_index: HashMap<&str, &Vec<String>> = right
        .rows
        .iter()
        .map(|(k, cells)| (k.as_str(), cells))
        .collect();

    let mut columns = left.columns.clone();
    columns.extend(right.columns.iter().cloned());
    let mut merged = KeyedFrame::new(
        format!("{} ⋈ {}", left.label, right.label),
        columns,
    );

    let mut report = JoinReport::default();
    let mut matched_right: HashSet<&str> = HashSet::new();
    for (key, cells) in &left.rows {
        match right_index.get(key.as_str()) {
            Some(right_cells) => {
                let mut row = cells.clone();
                row.extend(right_cells.iter().cloned());
                merged.push_row(key.clone(), row)?;
                matched_right.insert(key.as_str());
                report.matched += 1;
            }
            None => report.left_only.push(key.clone()),
        }
    }
    for (key, _) in &right.rows {
        if !matched_right.contains(key.as_str()) {
            report.right_only.push(key.clone());
        }
    }
    report.left_only.sort_unstable();
    report.right_only.sort_unstable();
    Ok((merged, report))
}

/// Build a single-column frame from a fips -> value map (used to merge
/// aggregated precinct shares into the county frame).
pub fn frame_from_map(
    label: impl Into<String>,
    column: &str,
    values: &BTreeMap<String, f64>,
) -> KeyedFrame {
    let mut frame = KeyedFrame::new(label, vec![column.to_string()]);
    for (fips, value) in values {
        frame
            .push_row(fips.clone(), vec![format!("{value}")])
            .expect("single-column row");
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(label: &str, cols: &[&str], rows: &[(&str, &[&str])]) -> KeyedFrame {
        let mut f = KeyedFrame::new(label, cols.iter().map(|c| c.to_string()).collect());
        for (key, cells) in rows {
            f.push_row(
                key.to_string(),
                cells.iter().map(|c| c.to_string()).collect(),
            )
            .unwrap();
        }
        f
    }

    #[test]
    fn inner_join_counts_both_sides() {
        let left = frame("l", &["a"], &[("01001", &["1"]), ("01003", &["2"])]);
        let right = frame("r", &["b"], &[("01003", &["x"]), ("48001", &["y"])]);
        let (merged, report) = join_by_fips(&left, &right).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged.rows()[0].0, "01003");
        assert_eq!(merged.rows()[0].1, vec!["2", "x"]);
        assert_eq!(report.matched, 1);
        assert_eq!(report.left_only, vec!["01001"]);
        assert_eq!(report.right_only, vec!["48001"]);
    }

    #[test]
    fn identical_key_sets_preserve_row_count() {
        let left = frame("l", &["a"], &[("01001", &["1"]), ("01003", &["2"])]);
        let right = frame("r", &["b"], &[("01003", &["x"]), ("01001", &["y"])]);
        let (merged, report) = join_by_fips(&left, &right).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(report.matched, 2);
        assert!(report.left_only.is_empty());
        assert!(report.right_only.is_empty());
    }

    #[test]
    fn duplicate_key_is_an_error() {
        let left = frame("l", &["a"], &[("01001", &["1"])]);
        let right = frame("r", &["b"], &[("01001", &["x"]), ("01001", &["y"])]);
        let err = join_by_fips(&left, &right).unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { ref fips, .. } if fips == "01001"));
    }

    #[test]
    fn column_collision_is_an_error() {
        let left = frame("l", &["a"], &[("01001", &["1"])]);
        let right = frame("r", &["A"], &[("01001", &["x"])]);
        assert!(matches!(
            join_by_fips(&left, &right),
            Err(Error::DuplicateColumn { .. })
        ));
    }
}
