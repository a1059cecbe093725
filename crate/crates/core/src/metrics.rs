//! Test-set evaluation: MAE, r², and the OLS-vs-forest comparison.
//!
//! Metrics are unweighted over test rows by default, matching the plain
//! 1/N display formulas; weighted variants are available behind a flag.

use serde::Serialize;

use crate::data::ModelFrame;
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::ols::OlsFit;

/// Evaluation of one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub label: String,
    pub mae: f64,
    pub r2: f64,
    pub n_test: usize,
    /// Predictions outside [0, 1]; the linear model is not clamped, so
    /// these are flagged rather than fixed.
    pub n_out_of_range: usize,
    /// Per-row residuals ŷ − y, in test-row order.
    pub residuals: Vec<f64>,
}

fn check_lengths(predicted: &[f64], actual: &[f64]) -> Result<()> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Mean absolute error (1/N)·Σ|ŷᵢ − yᵢ|.
pub fn mae(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    let sum: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).abs())
        .sum();
    Ok(sum / predicted.len() as f64)
}

/// Weight-averaged absolute error Σw|ŷ−y| / Σw.
pub fn mae_weighted(predicted: &[f64], actual: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    check_lengths(predicted, weights)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((p, a), w) in predicted.iter().zip(actual).zip(weights) {
        num += w * (p - a).abs();
        den += w;
    }
    Ok(num / den)
}

/// Coefficient of determination 1 − Σ(ŷ−y)² / Σ(y−ȳ)².
pub fn r_squared(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    if predicted.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: predicted.len(),
        });
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let tss: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    if tss == 0.0 {
        return Err(Error::ConstantActuals);
    }
    let sse: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(1.0 - sse / tss)
}

/// Weighted r² with weighted mean and weighted sums of squares.
pub fn r_squared_weighted(predicted: &[f64], actual: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    check_lengths(predicted, weights)?;
    let w_sum: f64 = weights.iter().sum();
    let mean: f64 = actual
        .iter()
        .zip(weights)
        .map(|(y, w)| w * y)
        .sum::<f64>()
        / w_sum;
    let tss: f64 = actual
        .iter()
        .zip(weights)
        .map(|(y, w)| w * (y - mean) * (y - mean))
        .sum();
    if tss == 0.0 {
        return Err(Error::ConstantActuals);
    }
    let sse: f64 = predicted
        .iter()
        .zip(actual)
        .zip(weights)
        .map(|((p, a), w)| w * (p - a) * (p - a))
        .sum();
    Ok(1.0 - sse / tss)
}

fn report(
    label: &str,
    predicted: &[f64],
    actual: &[f64],
    weights: Option<&[f64]>,
) -> Result<MetricsReport> {
    let (mae_value, r2_value) = match weights {
        None => (mae(predicted, actual)?, r_squared(predicted, actual)?),
        Some(w) => (
            mae_weighted(predicted, actual, w)?,
            r_squared_weighted(predicted, actual, w)?,
        ),
    };
    Ok(MetricsReport {
        label: label.to_string(),
        mae: mae_value,
        r2: r2_value,
        n_test: predicted.len(),
        n_out_of_range: predicted
            .iter()
            .filter(|p| !(0.0..=1.0).contains(*p))
            .count(),
        residuals: predicted.iter().zip(actual).map(|(p, a)| p - a).collect(),
    })
}

/// Paired evaluation of a fitted OLS model and a trained forest on the
/// same held-out rows. Both models must have been trained on the same
/// training partition, disjoint from `test`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub ols: MetricsReport,
    pub forest: MetricsReport,
    pub weighted: bool,
}

impl ModelComparison {
    pub fn mae_winner(&self) -> &str {
        if self.forest.mae < self.ols.mae {
            &self.forest.label
        } else if self.ols.mae < self.forest.mae {
            &self.ols.label
        } else {
            "tie"
        }
    }

    pub fn r2_winner(&self) -> &str {
        if self.forest.r2 > self.ols.r2 {
            &self.forest.label
        } else if self.ols.r2 > self.forest.r2 {
            &self.ols.label
        } else {
            "tie"
        }
    }

    /// Plain-text comparison table with per-metric winners.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10}{:>12}{:>12}{:>8}\n",
            "model", "mae", "r2", "n"
        ));
        for r in [&self.ols, &self.forest] {
            out.push_str(&format!(
                "{:<10}{:>12.4}{:>12.4}{:>8}\n",
                r.label, r.mae, r.r2, r.n_test
            ));
        }
        out.push_str(&format!(
            "winner    {:>12} (mae) {:>6} (r2)\n",
            self.mae_winner(),
            self.r2_winner()
        ));
        if self.ols.n_out_of_range + self.forest.n_out_of_range > 0 {
            out.push_str(&format!(
                "predictions outside [0,1]: ols {}, forest {}\n",
                self.ols.n_out_of_range, self.forest.n_out_of_range
            ));
        }
        out
    }
}

pub fn compare_models(
    ols_fit: &OlsFit,
    forest: &Forest,
    test: &ModelFrame,
    weighted: bool,
) -> Result<ModelComparison> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let actual = test.target();
    let weights = weighted.then(|| test.weight());
    let ols_pred = ols_fit.predict_frame(test)?;
    let forest_pred = forest.predict_frame(test)?;
    Ok(ModelComparison {
        ols: report("ols", &ols_pred, actual, weights)?,
        forest: report("forest", &forest_pred, actual, weights)?,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [0.1, 0.4, 0.9];
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_mae() {
        let m = mae(&[0.5, 0.7], &[0.6, 0.6]).unwrap();
        assert!((m - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mean_predictor_scores_zero_r2() {
        let y = [0.2, 0.4, 0.6];
        let mean = [0.4, 0.4, 0.4];
        assert!((r_squared(&mean, &y).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_r2() {
        // SSE = 0.01 + 0 + 0.01 = 0.02; TSS around ȳ=0.4 is also 0.02.
        let r2 = r_squared(&[0.2, 0.4, 0.6], &[0.3, 0.4, 0.5]).unwrap();
        assert!(r2.abs() < 1e-12);
    }

    #[test]
    fn mae_is_symmetric_and_permutation_invariant() {
        let p = [0.1, 0.5, 0.9, 0.3];
        let a = [0.2, 0.4, 0.7, 0.6];
        assert_eq!(mae(&p, &a).unwrap(), mae(&a, &p).unwrap());
        let p2 = [0.9, 0.3, 0.1, 0.5];
        let a2 = [0.7, 0.6, 0.2, 0.4];
        assert!((mae(&p, &a).unwrap() - mae(&p2, &a2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn r2_is_one_only_for_exact_predictions() {
        let a = [0.1, 0.2, 0.3];
        let near = [0.1, 0.2, 0.300001];
        assert!(r_squared(&near, &a).unwrap() < 1.0);
        assert_eq!(r_squared(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            mae(&[0.1], &[0.1, 0.2]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(mae(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(
            r_squared(&[0.1, 0.2], &[0.5, 0.5]),
            Err(Error::ConstantActuals)
        ));
        assert!(matches!(
            r_squared(&[0.1], &[0.5]),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn comparison_table_formats_the_published_pair() {
        // Report-format fixture with the published MAE/r² pairs.
        let cmp = ModelComparison {
            ols: MetricsReport {
                label: "ols".into(),
                mae: 0.083,
                r2: 0.399,
                n_test: 392,
                n_out_of_range: 0,
                residuals: vec![],
            },
            forest: MetricsReport {
                label: "forest".into(),
                mae: 0.078,
                r2: 0.441,
                n_test: 392,
                n_out_of_range: 0,
                residuals: vec![],
            },
            weighted: false,
        };
        let table = cmp.to_table();
        assert!(table.contains("0.0830"));
        assert!(table.contains("0.0780"));
        assert!(table.contains("0.3990"));
        assert!(table.contains("0.4410"));
        assert_eq!(cmp.mae_winner(), "forest");
        assert_eq!(cmp.r2_winner(), "forest");
    }

    #[test]
    fn out_of_range_predictions_are_flagged_not_clamped() {
        let r = report("ols", &[-0.05, 0.5, 1.2], &[0.1, 0.5, 0.9], None).unwrap();
        assert_eq!(r.n_out_of_range, 2);
        // residuals keep the unclamped values
        assert!((r.residuals[0] - (-0.15)).abs() < 1e-12);
    }

    #[test]
    fn identical_models_give_identical_reports() {
        use crate::forest::{train_forest, ForestConfig};
        use crate::ols::fit_wls;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 0.4 + 0.3 * r[0] - 0.2 * r[1] + 0.01 * rng.random_range(-1.0..1.0))
            .collect();
        let frame = ModelFrame::new(
            vec!["a".into(), "b".into()],
            rows,
            y,
            vec![1.0; 60],
            None,
        )
        .unwrap();
        let fit = fit_wls(&frame).unwrap();
        let forest = train_forest(
            &frame,
            &ForestConfig {
                n_trees: 5,
                min_node_size: 5,
                mtry: None,
                seed: 1,
                max_depth: None,
            },
        )
        .unwrap();
        let c1 = compare_models(&fit, &forest, &frame, false).unwrap();
        let c2 = compare_models(&fit, &forest, &frame, false).unwrap();
        assert_eq!(c1, c2);
    }
}
