//! Column schema: maps the canonical record fields onto CSV header names
//! and carries the percent-scale flag for share columns.
//!
//! Schema files are key-value text, one `field = column` pair per line.
//! Keys are canonical field names plus the special key `scale`; `#` starts
//! a comment. The value `-` marks an optional field as absent from the
//! input (the loader fills a default). Example:
//!
//! ```text
//! # columns of the assembled county file
//! scale        = percent
//! fips         = FIPS
//! name         = CTYNAME
//! state        = STATE
//! perc_full_vac = Perc_FullVac
//! pop_adult    = Pop18Plus
//! pop_total    = TotalPop
//! ```
//!
//! Fields not mentioned keep their canonical name as the column alias.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// How share columns are scaled in the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareScale {
    /// Shares are fractions in [0, 1]; stored as-is.
    Fraction,
    /// Shares are percentages in [0, 100]; divided by 100 on load.
    Percent,
}

/// Fields the loader requires a column for.
pub const REQUIRED_FIELDS: [&str; 10] = [
    "fips",
    "perc_full_vac",
    "perc_food_st",
    "perc_asian",
    "perc_hisp",
    "perc_black",
    "perc_old65",
    "perc_young25",
    "perc_rep",
    "pop_adult",
];

/// Fields the loader fills with a default when no column is present:
/// `name`/`state` default to empty strings, `pop_total` to `pop_adult`.
pub const OPTIONAL_FIELDS: [&str; 3] = ["name", "state", "pop_total"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    /// canonical field -> CSV column alias; `None` = optional field absent.
    columns: BTreeMap<String, Option<String>>,
    pub scale: ShareScale,
}

impl Default for Schema {
    fn default() -> Self {
        let mut columns = BTreeMap::new();
        for field in REQUIRED_FIELDS.iter().chain(OPTIONAL_FIELDS.iter()) {
            columns.insert(field.to_string(), Some(field.to_string()));
        }
        Schema {
            columns,
            scale: ShareScale::Fraction,
        }
    }
}

impl Schema {
    /// The CSV column alias for a canonical field, `None` if declared absent.
    pub fn alias(&self, field: &str) -> Option<&str> {
        self.columns.get(field).and_then(|a| a.as_deref())
    }

    pub fn is_known_field(field: &str) -> bool {
        REQUIRED_FIELDS.contains(&field) || OPTIONAL_FIELDS.contains(&field)
    }

    /// Parse a key-value schema description.
    pub fn parse(text: &str) -> Result<Schema> {
        let mut schema = Schema::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Schema(format!("line {}: expected `field = column`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::Schema(format!(
                    "line {}: empty value for `{key}`",
                    lineno + 1
                )));
            }
            if key == "scale" {
                schema.scale = match value {
                    "fraction" => ShareScale::Fraction,
                    "percent" => ShareScale::Percent,
                    other => {
                        return Err(Error::Schema(format!(
                            "line {}: scale must be `fraction` or `percent`, got `{other}`",
                            lineno + 1
                        )))
                    }
                };
                continue;
            }
            if !Self::is_known_field(key) {
                return Err(Error::Schema(format!(
                    "line {}: unknown field `{key}`",
                    lineno + 1
                )));
            }
            if value == "-" {
                if REQUIRED_FIELDS.contains(&key) {
                    return Err(Error::Schema(format!(
                        "line {}: required field `{key}` cannot be marked absent",
                        lineno + 1
                    )));
                }
                schema.columns.insert(key.to_string(), None);
            } else {
                schema
                    .columns
                    .insert(key.to_string(), Some(value.to_string()));
            }
        }
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Schema> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text)
    }
}
