//! Exact Shapley attributions for forest predictions.
//!
//! Switching a feature "off" is embedded in the tree walk: at a split on
//! an off-coalition feature the descent takes both branches and averages
//! them by the coverage weights recorded at training time. Every one of
//! the 2^M coalition values is computed once per record and reused for
//! all features, so the factorial-kernel sum is exact and the additivity
//! identity baseline + Σφ = prediction holds by construction.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::data::ModelFrame;
use crate::error::{Error, Result};
use crate::forest::{DecisionTree, Forest, TreeNode};

/// A feature coalition as a bitmask; bit j set means feature j is
/// switched on (its observed value is used during descent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoalitionMask(u32);

impl CoalitionMask {
    /// Enumeration guard: 2^25 coalition values per record at most.
    pub const MAX_FEATURES: usize = 25;

    pub fn empty() -> CoalitionMask {
        CoalitionMask(0)
    }

    pub fn full(n_features: usize) -> CoalitionMask {
        CoalitionMask(((1_u64 << n_features) - 1) as u32)
    }

    pub fn from_bits(bits: u32) -> CoalitionMask {
        CoalitionMask(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, feature: usize) -> bool {
        self.0 >> feature & 1 == 1
    }

    pub fn with(self, feature: usize) -> CoalitionMask {
        CoalitionMask(self.0 | 1 << feature)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// All 2^M masks in ascending bit order.
    pub fn all(n_features: usize) -> impl Iterator<Item = CoalitionMask> {
        (0..(1_u64 << n_features)).map(|b| CoalitionMask(b as u32))
    }
}

/// Per-observation attribution: the model baseline v(∅), one φ per
/// feature, and the prediction they sum to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapExplanation {
    pub id: String,
    pub baseline: f64,
    pub phi: Vec<f64>,
    pub prediction: f64,
    /// How many coalition values were evaluated for this record
    /// (always 2^M with exact enumeration).
    pub coalition_evals: usize,
}

impl ShapExplanation {
    /// Signed additivity residual baseline + Σφ − prediction.
    pub fn additivity_gap(&self) -> f64 {
        self.baseline + self.phi.iter().sum::<f64>() - self.prediction
    }
}

/// Coalition-conditional expectation of one tree: follow the routing rule
/// at on-coalition splits, average both subtrees by coverage weight at
/// off-coalition splits.
pub fn tree_expected_value(
    tree: &DecisionTree,
    features: &[f64],
    mask: CoalitionMask,
) -> Result<f64> {
    eval_node(tree.nodes(), 0, features, mask)
}

fn eval_node(
    nodes: &[TreeNode],
    idx: usize,
    features: &[f64],
    mask: CoalitionMask,
) -> Result<f64> {
    match &nodes[idx] {
        TreeNode::Leaf { value, .. } => Ok(*value),
        TreeNode::Internal {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            if mask.contains(*feature) {
                let v = *features
                    .get(*feature)
                    .ok_or_else(|| Error::FeatureMismatch {
                        expected: format!("feature index {feature}"),
                        got: format!("{} features", features.len()),
                    })?;
                let child = if v < *threshold { *left } else { *right };
                eval_node(nodes, child, features, mask)
            } else {
                let w_left = nodes[*left].coverage_weight();
                let w_right = nodes[*right].coverage_weight();
                let total = w_left + w_right;
                if total <= 0.0 {
                    return Err(Error::CorruptModel(format!(
                        "zero coverage weight below internal node {idx}"
                    )));
                }
                let vl = eval_node(nodes, *left, features, mask)?;
                let vr = eval_node(nodes, *right, features, mask)?;
                Ok((w_left * vl + w_right * vr) / total)
            }
        }
    }
}

/// Mean of the per-tree coalition-conditional expectations.
pub fn coalition_value(forest: &Forest, features: &[f64], mask: CoalitionMask) -> Result<f64> {
    if features.len() != forest.n_features() {
        return Err(Error::FeatureMismatch {
            expected: format!("{} features", forest.n_features()),
            got: format!("{}", features.len()),
        });
    }
    let mut sum = 0.0;
    for tree in forest.trees() {
        sum += tree_expected_value(tree, features, mask)?;
    }
    Ok(sum / forest.trees().len() as f64)
}

/// The model baseline v(∅): the mean over trees of each tree's
/// coverage-weighted expectation, independent of any record.
pub fn baseline(forest: &Forest) -> Result<f64> {
    let mut sum = 0.0;
    for tree in forest.trees() {
        sum += eval_node(tree.nodes(), 0, &[], CoalitionMask::empty())?;
    }
    Ok(sum / forest.trees().len() as f64)
}

/// Shapley kernel weights by coalition size: w[s] = s!(M−1−s)!/M!.
fn kernel_weights(n_features: usize) -> Vec<f64> {
    let factorial = |k: usize| -> f64 { (1..=k).map(|v| v as f64).product() };
    let m_fact = factorial(n_features);
    (0..n_features)
        .map(|s| factorial(s) * factorial(n_features - 1 - s) / m_fact)
        .collect()
}

/// Exact Shapley attribution of one record against the forest:
/// φⱼ = Σ_{S ⊆ F∖{j}} |S|!(M−|S|−1)!/M! · (v(S∪{j}) − v(S)),
/// with every coalition value computed once and shared across features.
pub fn shap_values(forest: &Forest, features: &[f64]) -> Result<ShapExplanation> {
    let m = forest.n_features();
    if m > CoalitionMask::MAX_FEATURES {
        return Err(Error::TooManyFeatures {
            count: m,
            max: CoalitionMask::MAX_FEATURES,
        });
    }
    if features.len() != m {
        return Err(Error::FeatureMismatch {
            expected: format!("{m} features"),
            got: format!("{}", features.len()),
        });
    }

    let n_masks = 1_usize << m;
    let mut values = Vec::with_capacity(n_masks);
    let mut evals = 0_usize;
    for mask in CoalitionMask::all(m) {
        values.push(coalition_value(forest, features, mask)?);
        evals += 1;
    }

    let weights = kernel_weights(m);
    let mut phi = vec![0.0; m];
    for bits in 0..n_masks {
        let mask = CoalitionMask::from_bits(bits as u32);
        let size = mask.len();
        for (j, phi_j) in phi.iter_mut().enumerate() {
            if !mask.contains(j) {
                let with_j = mask.with(j).bits() as usize;
                *phi_j += weights[size] * (values[with_j] - values[bits]);
            }
        }
    }

    Ok(ShapExplanation {
        id: String::new(),
        baseline: values[0],
        phi,
        prediction: values[n_masks - 1],
        coalition_evals: evals,
    })
}

/// One row that could not be explained.
#[derive(Debug, Clone, Serialize)]
pub struct RowFailure {
    pub index: usize,
    pub id: String,
    pub message: String,
}

/// Batch result: explanations in input order plus any failed rows.
#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    pub explanations: Vec<ShapExplanation>,
    pub failures: Vec<RowFailure>,
}

/// Explain every row of a frame. Rows are independent and run in
/// parallel over the immutable forest; per-row errors are collected, not
/// propagated, so one bad row cannot abort the batch.
pub fn batch_explain(forest: &Forest, frame: &ModelFrame) -> Result<BatchOutcome> {
    batch_explain_with_progress(forest, frame, &|_, _| {})
}

pub fn batch_explain_with_progress(
    forest: &Forest,
    frame: &ModelFrame,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<BatchOutcome> {
    if frame.feature_names() != forest.feature_names() {
        return Err(Error::FeatureMismatch {
            expected: forest.feature_names().join(","),
            got: frame.feature_names().join(","),
        });
    }
    let total = frame.n_rows();
    let done = AtomicUsize::new(0);
    let results: Vec<std::result::Result<ShapExplanation, RowFailure>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let result = shap_values(forest, frame.row(i)).map(|mut expl| {
                expl.id = frame.ids()[i].clone();
                expl
            });
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            result.map_err(|e| RowFailure {
                index: i,
                id: frame.ids()[i].clone(),
                message: e.to_string(),
            })
        })
        .collect();

    let mut outcome = BatchOutcome::default();
    for r in results {
        match r {
            Ok(expl) => outcome.explanations.push(expl),
            Err(fail) => outcome.failures.push(fail),
        }
    }
    Ok(outcome)
}

/// Render the per-county decomposition: baseline, one signed φ line per
/// feature (with the feature's observed value when available), and the
/// prediction they sum to. Values print at three decimals.
pub fn format_decomposition(
    expl: &ShapExplanation,
    feature_names: &[String],
    feature_values: Option<&[f64]>,
    header: &str,
) -> String {
    let name_width = feature_names
        .iter()
        .map(|n| n.len())
        .max()
        .unwrap_or(0)
        .max("prediction".len());
    let mut out = String::new();
    if !header.is_empty() {
        let _ = writeln!(out, "{header}");
    }
    let _ = writeln!(
        out,
        "    {:<name_width$}  {:>8.3}",
        "baseline", expl.baseline
    );
    for (j, name) in feature_names.iter().enumerate() {
        let value_note = match feature_values {
            Some(values) => format!("   [value {:.3}]", values[j]),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "  + {:<name_width$}  {:>8}{}",
            name,
            format!("{:+.3}", expl.phi[j]),
            value_note
        );
    }
    let _ = writeln!(
        out,
        "  = {:<name_width$}  {:>8.3}",
        "prediction", expl.prediction
    );
    out
}
