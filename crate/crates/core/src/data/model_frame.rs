//! Numeric training view shared by the OLS, forest, SHAP, and metrics
//! modules: feature rows in a stable column order, a target, and a
//! per-row observation weight.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFrame {
    feature_names: Vec<String>,
    /// Row-major feature values, `n_rows * n_features` long.
    values: Vec<f64>,
    target: Vec<f64>,
    weight: Vec<f64>,
    ids: Vec<String>,
}

impl ModelFrame {
    /// Build a frame from per-row feature vectors. All values must be
    /// finite; `ids` defaults to the row index rendered as text.
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
        weight: Vec<f64>,
        ids: Option<Vec<String>>,
    ) -> Result<ModelFrame> {
        let n = rows.len();
        let m = feature_names.len();
        if target.len() != n || weight.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: target.len().max(weight.len()),
            });
        }
        let ids = match ids {
            Some(ids) => {
                if ids.len() != n {
                    return Err(Error::LengthMismatch {
                        left: n,
                        right: ids.len(),
                    });
                }
                ids
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::FeatureMismatch {
                    expected: format!("{m} features"),
                    got: format!("{} in row {i}", row.len()),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        what: "feature".to_string(),
                        row: i,
                    });
                }
                values.push(v);
            }
        }
        for (i, &y) in target.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::NonFinite {
                    what: "target".to_string(),
                    row: i,
                });
            }
        }
        for (i, &w) in weight.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    what: "weight".to_string(),
                    row: i,
                });
            }
        }
        Ok(ModelFrame {
            feature_names,
            values,
            target,
            weight,
            ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features() + feature]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.n_features();
        &self.values[row * m..(row + 1) * m]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Weight-positivity check shared by the fitting routines.
    pub fn require_positive_weights(&self) -> Result<()> {
        for (i, &w) in self.weight.iter().enumerate() {
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::NonPositiveWeight { row: i });
            }
        }
        Ok(())
    }

    /// Weighted mean of the target, Σ w·y / Σ w.
    pub fn weighted_target_mean(&self) -> f64 {
        let mut sw = 0.0;
        let mut swy = 0.0;
        for (&y, &w) in self.target.iter().zip(&self.weight) {
            sw += w;
            swy += w * y;
        }
        swy / sw
    }
}
