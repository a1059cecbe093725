//! County-level vaccination-rate modeling engine.
//!
//! The crate fits a population-weighted linear model and a weighted random
//! forest regressor on county tabular data, and computes exact per-county
//! Shapley attributions for every predictor by enumerating all feature
//! coalitions against the trained forest.
//!
//! Modules:
//! - [`data`] — CSV ingestion, fips joins, precinct aggregation, splits.
//! - [`ols`] — weighted least squares with full inference statistics.
//! - [`forest`] — bagged variance-reduction regression trees.
//! - [`shap`] — exact coalition-enumeration Shapley explainer.
//! - [`metrics`] — MAE / r² evaluation and model comparison.

pub mod data;
pub mod error;
pub mod forest;
pub mod metrics;
pub mod ols;
pub mod seed;
pub mod shap;

pub use error::{Error, Result};
