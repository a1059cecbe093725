//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("required column `{name}` not found in header")]
    MissingColumn { name: String },

    #[error("row {row}: column `{column}` has unparseable numeric cell `{value}`")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("input contains no data rows")]
    EmptyDataset,

    #[error("duplicate fips `{fips}` on {side} side of join")]
    DuplicateKey { fips: String, side: String },

    #[error("column `{name}` present on both sides of join")]
    DuplicateColumn { name: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-positive or non-finite weight at row {row}")]
    NonPositiveWeight { row: usize },

    #[error("non-finite value in {what} at row {row}")]
    NonFinite { what: String, row: usize },

    #[error("design matrix is rank deficient (collinear predictors)")]
    RankDeficient,

    #[error("target column is constant; fit statistics undefined")]
    ConstantTarget,

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("length mismatch: {left} predicted vs {right} actual")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("actual values are constant; r-squared undefined")]
    ConstantActuals,

    #[error("unknown column `{name}`")]
    UnknownColumn { name: String },

    #[error("unknown fips `{fips}`")]
    UnknownFips { fips: String },

    #[error("feature mismatch: expected {expected}, got {got}")]
    FeatureMismatch { expected: String, got: String },

    #[error("{count} features exceeds the exact-enumeration guard ({max})")]
    TooManyFeatures { count: usize, max: usize },

    #[error("corrupt model: {0}")]
    CorruptModel(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
