//! Population-weighted least squares with classical inference statistics.
//!
//! The fit minimizes Σ wᵢ(yᵢ − xᵢᵀβ)² via a QR decomposition of the
//! √w-scaled design matrix, which also provides the rank diagnostic for
//! collinear predictors. Standard errors use the classical homoskedastic
//! WLS formula Var(β̂) = σ̂²(XᵀWX)⁻¹; p-values come from the t
//! distribution with the residual degrees of freedom.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::data::{CountyRecord, ModelFrame};
use crate::error::{Error, Result};

/// How observation weights are interpreted for degrees of freedom.
///
/// `Population` weights (the default) treat each row as one observation
/// regardless of its weight, so scaling all weights by a constant leaves
/// coefficients and standard errors unchanged. `Frequency` weights treat
/// a weight of k as k identical observations; a fit with integer frequency
/// weights is then identical — coefficients and standard errors — to a
/// fit on the physically duplicated rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Population,
    Frequency,
}

/// A fitted weighted linear model with its inference statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub target_name: String,
    /// Non-intercept term names, in design order.
    pub predictor_names: Vec<String>,
    /// `[intercept, β₁, …]`, aligned with `predictor_names` after slot 0.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub f_stat: f64,
    pub f_df: (usize, usize),
    pub f_p_value: f64,
    pub residual_std_error: f64,
    /// Effective observation count (rows, or Σw under frequency weights).
    pub n_obs: usize,
    pub weight_kind: WeightKind,
    /// Weighted means of the predictors and the target, kept so the fit
    /// can be audited against the weighted-centroid identity.
    pub weighted_feature_means: Vec<f64>,
    pub weighted_target_mean: f64,
}

/// Relative condition threshold on the R diagonal below which the design
/// is reported rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

/// Fit with population weight semantics (the pipeline default).
pub fn fit_wls(frame: &ModelFrame) -> Result<OlsFit> {
    fit_wls_with(frame, WeightKind::Population)
}

pub fn fit_wls_with(frame: &ModelFrame, kind: WeightKind) -> Result<OlsFit> {
    let n = frame.n_rows();
    let m = frame.n_features();
    let k = m + 1; // intercept column first
    frame.require_positive_weights()?;

    let weight_sum: f64 = frame.weight().iter().sum();
    let effective_n = match kind {
        WeightKind::Population => n as f64,
        WeightKind::Frequency => weight_sum,
    };
    if effective_n <= k as f64 {
        return Err(Error::TooFewRows {
            needed: k + 1,
            got: effective_n.floor() as usize,
        });
    }

    let sqrt_w: Vec<f64> = frame.weight().iter().map(|w| w.sqrt()).collect();
    let design = DMatrix::from_fn(n, k, |i, j| {
        if j == 0 {
            sqrt_w[i]
        } else {
            sqrt_w[i] * frame.value(i, j - 1)
        }
    });
    let response = DVector::from_fn(n, |i, _| sqrt_w[i] * frame.target()[i]);

    let qr = design.qr();
    let r = qr.r();
    let max_diag = (0..k).map(|j| r[(j, j)].abs()).fold(0.0_f64, f64::max);
    if max_diag == 0.0
        || (0..k).any(|j| r[(j, j)].abs() <= RANK_TOLERANCE * max_diag)
    {
        return Err(Error::RankDeficient);
    }
    let qtb = qr.q().transpose() * &response;
    let beta = back_substitute(&r, qtb.as_slice());

    // (XᵀWX)⁻¹ = R⁻¹R⁻ᵀ; only the diagonal is needed for standard errors.
    let r_inv = invert_upper_triangular(&r);
    let xtwx_inv_diag: Vec<f64> = (0..k)
        .map(|j| (j..k).map(|l| r_inv[(j, l)] * r_inv[(j, l)]).sum())
        .collect();

    let mut rss_w = 0.0;
    for i in 0..n {
        let mut fitted = beta[0];
        for j in 0..m {
            fitted += beta[j + 1] * frame.value(i, j);
        }
        let e = frame.target()[i] - fitted;
        rss_w += frame.weight()[i] * e * e;
    }

    let df2 = effective_n - k as f64;
    let sigma2 = rss_w / df2;
    let residual_std_error = sigma2.sqrt();

    let std_errors: Vec<f64> = xtwx_inv_diag
        .iter()
        .map(|c| (sigma2 * c).sqrt())
        .collect();
    let t_stats: Vec<f64> = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| b / se)
        .collect();
    let t_dist = StudentsT::new(0.0, 1.0, df2).expect("positive df");
    let p_values: Vec<f64> = t_stats
        .iter()
        .map(|t| 2.0 * (1.0 - t_dist.cdf(t.abs())))
        .collect();

    let y_mean = frame.weighted_target_mean();
    let tss_w: f64 = frame
        .target()
        .iter()
        .zip(frame.weight())
        .map(|(y, w)| w * (y - y_mean) * (y - y_mean))
        .sum();
    if tss_w == 0.0 {
        return Err(Error::ConstantTarget);
    }
    let r2 = 1.0 - rss_w / tss_w;
    let adj_r2 = 1.0 - (1.0 - r2) * (effective_n - 1.0) / df2;
    let f_stat = (r2 / m as f64) / ((1.0 - r2) / df2);
    let f_dist = FisherSnedecor::new(m as f64, df2).expect("positive dfs");
    let f_p_value = 1.0 - f_dist.cdf(f_stat);

    let feature_means: Vec<f64> = (0..m)
        .map(|j| {
            let swx: f64 = (0..n)
                .map(|i| frame.weight()[i] * frame.value(i, j))
                .sum();
            swx / weight_sum
        })
        .collect();

    Ok(OlsFit {
        target_name: "target".to_string(),
        predictor_names: frame.feature_names().to_vec(),
        coefficients: beta,
        std_errors,
        t_stats,
        p_values,
        r2,
        adj_r2,
        f_stat,
        f_df: (m, df2.round() as usize),
        f_p_value,
        residual_std_error,
        n_obs: effective_n.round() as usize,
        weight_kind: kind,
        weighted_feature_means: feature_means,
        weighted_target_mean: y_mean,
    })
}

/// Fit the canonical frame and keep the target's column name in the
/// summary header.
pub fn fit_wls_named(frame: &ModelFrame, target_name: &str) -> Result<OlsFit> {
    let mut fit = fit_wls(frame)?;
    fit.target_name = target_name.to_string();
    Ok(fit)
}

fn back_substitute(r: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut x = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for l in (j + 1)..k {
            s -= r[(j, l)] * x[l];
        }
        x[j] = s / r[(j, j)];
    }
    x
}

fn invert_upper_triangular(r: &DMatrix<f64>) -> DMatrix<f64> {
    let k = r.nrows();
    let mut inv = DMatrix::zeros(k, k);
    for col in 0..k {
        let mut e = vec![0.0; k];
        e[col] = 1.0;
        let x = back_substitute(r, &e);
        for row in 0..k {
            inv[(row, col)] = x[row];
        }
    }
    inv
}

impl OlsFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    /// Coefficient by predictor name (`None` for unknown names).
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.predictor_names
            .iter()
            .position(|p| p == name)
            .map(|j| self.coefficients[j + 1])
    }

    /// Linear prediction β₀ + Σ βⱼxⱼ for a feature row in design order.
    /// Predictions are deliberately not clamped to [0, 1].
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.predictor_names.len() {
            return Err(Error::FeatureMismatch {
                expected: format!("{} features", self.predictor_names.len()),
                got: format!("{}", features.len()),
            });
        }
        let mut y = self.coefficients[0];
        for (j, &x) in features.iter().enumerate() {
            y += self.coefficients[j + 1] * x;
        }
        Ok(y)
    }

    /// Prediction for a county record, looking predictors up by name.
    pub fn predict_record(&self, record: &CountyRecord) -> Result<f64> {
        let mut features = Vec::with_capacity(self.predictor_names.len());
        for name in &self.predictor_names {
            let value = record.numeric(name).ok_or_else(|| Error::UnknownColumn {
                name: name.clone(),
            })?;
            features.push(value);
        }
        self.predict(&features)
    }

    /// Predictions for every row of a frame with matching feature order.
    pub fn predict_frame(&self, frame: &ModelFrame) -> Result<Vec<f64>> {
        if frame.feature_names() != self.predictor_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.predictor_names.join(","),
                got: frame.feature_names().join(","),
            });
        }
        (0..frame.n_rows()).map(|i| self.predict(frame.row(i))).collect()
    }
}

/// Significance stars at the thresholds printed in the summary footer.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Regression summary in the conventional journal layout: one row per
/// term as `coefficient (std error)` with significance stars, then the
/// fit statistics footer.
pub fn summary_table(fit: &OlsFit) -> String {
    const WIDTH: usize = 64;
    let rule = "=".repeat(WIDTH);
    let thin = "-".repeat(WIDTH);
    let mut out = String::new();
    out.push_str(&rule);
    out.push('\n');
    out.push_str(&format!(
        "{:>WIDTH$}\n",
        format!("Dependent variable: {}", fit.target_name)
    ));
    out.push_str(&thin);
    out.push('\n');
    let term = |name: &str, j: usize| -> String {
        let stars = significance_stars(fit.p_values[j]);
        let value = format!(
            "{:.3}{} ({:.3})",
            fit.coefficients[j], stars, fit.std_errors[j]
        );
        format!("{:<22}{:>rest$}\n", name, value, rest = WIDTH - 22)
    };
    for (i, name) in fit.predictor_names.iter().enumerate() {
        out.push_str(&term(name, i + 1));
    }
    out.push_str(&term("Constant", 0));
    out.push_str(&thin);
    out.push('\n');
    let kv = |label: &str, value: String| -> String {
        format!("{:<22}{:>rest$}\n", label, value, rest = WIDTH - 22)
    };
    out.push_str(&kv("Observations", thousands(fit.n_obs)));
    out.push_str(&kv("R2", format!("{:.3}", fit.r2)));
    out.push_str(&kv("Adjusted R2", format!("{:.3}", fit.adj_r2)));
    out.push_str(&kv(
        "Residual Std. Error",
        format!("{:.3} (df = {})", fit.residual_std_error, fit.f_df.1),
    ));
    out.push_str(&kv(
        "F Statistic",
        format!(
            "{:.3}{} (df = {}; {})",
            fit.f_stat,
            significance_stars(fit.f_p_value),
            fit.f_df.0,
            fit.f_df.1
        ),
    ));
    out.push_str(&rule);
    out.push('\n');
    out.push_str("Note: *p<0.1; **p<0.05; ***p<0.01\n");
    out
}
