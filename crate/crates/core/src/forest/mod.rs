//! Weighted random-forest regression: bootstrap bagging with
//! population-weighted draw probabilities, random-subspace split
//! candidates, and variance-reduction tree growth.
//!
//! Trees are stored as flat node arrays with downward child links, which
//! keeps serialization non-recursive and models byte-stable.

mod model_file;
mod split;
mod train;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CountyRecord, ModelFrame};
use crate::error::{Error, Result};

pub use train::{train_forest, train_forest_with_log, TrainingLog};

pub(crate) use split::best_split;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_node_size: usize,
    /// Split candidates drawn per node; `None` = ⌊√M⌋.
    pub mtry: Option<usize>,
    pub seed: u64,
    /// `None` = unlimited depth.
    pub max_depth: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 2000,
            min_node_size: 5,
            mtry: None,
            seed: 0,
            max_depth: None,
        }
    }
}

impl ForestConfig {
    /// The ⌊√M⌋ rule of thumb for split candidates.
    pub fn default_mtry(n_features: usize) -> usize {
        ((n_features as f64).sqrt().floor() as usize).max(1)
    }

    /// Resolve `mtry` against the feature count.
    pub fn resolved_mtry(&self, n_features: usize) -> usize {
        self.mtry.unwrap_or_else(|| Self::default_mtry(n_features))
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        if self.min_node_size < 1 {
            return Err(Error::InvalidConfig("min_node_size must be >= 1".into()));
        }
        if let Some(mtry) = self.mtry {
            if mtry < 1 || mtry > n_features {
                return Err(Error::InvalidConfig(format!(
                    "mtry must be in 1..={n_features}, got {mtry}"
                )));
            }
        }
        if let Some(d) = self.max_depth {
            if d < 1 {
                return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// One tree node. The routing rule is `x[feature] < threshold` → left,
/// otherwise right, so a record exactly at the threshold goes right.
/// `coverage_weight` is the population-weighted training mass that flowed
/// through the node; it drives the off-coalition averaging in the
/// explainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        coverage_weight: f64,
    },
    Leaf {
        /// Weighted mean target of the training rows in this node.
        value: f64,
        coverage_weight: f64,
        n_rows: usize,
    },
}

impl TreeNode {
    pub fn coverage_weight(&self) -> f64 {
        match self {
            TreeNode::Internal {
                coverage_weight, ..
            }
            | TreeNode::Leaf {
                coverage_weight, ..
            } => *coverage_weight,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }
}

/// A regression tree as a flat node array; `nodes[0]` is the root and
/// children always sit at larger indices than their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<TreeNode>,
    /// Seed this tree's bootstrap sample and split candidates were drawn
    /// from, so the sample can be regenerated for audits.
    pub bootstrap_seed: u64,
}

impl DecisionTree {
    /// Build a tree from explicit nodes, checking the structural
    /// invariants (non-empty, downward in-range child links, finite
    /// non-negative coverage weights, finite leaf values).
    pub fn from_nodes(nodes: Vec<TreeNode>, bootstrap_seed: u64) -> Result<DecisionTree> {
        if nodes.is_empty() {
            return Err(Error::CorruptModel("tree has no nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            match node {
                TreeNode::Internal {
                    left,
                    right,
                    threshold,
                    coverage_weight,
                    ..
                } => {
                    if *left <= i || *right <= i || *left >= nodes.len() || *right >= nodes.len()
                    {
                        return Err(Error::CorruptModel(format!(
                            "node {i}: child links must point strictly downward"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::CorruptModel(format!(
                            "node {i}: non-finite threshold"
                        )));
                    }
                    if !coverage_weight.is_finite() || *coverage_weight < 0.0 {
                        return Err(Error::CorruptModel(format!(
                            "node {i}: bad coverage weight"
                        )));
                    }
                }
                TreeNode::Leaf {
                    value,
                    coverage_weight,
                    ..
                } => {
                    if !value.is_finite() {
                        return Err(Error::CorruptModel(format!("node {i}: non-finite leaf")));
                    }
                    if !coverage_weight.is_finite() || *coverage_weight < 0.0 {
                        return Err(Error::CorruptModel(format!(
                            "node {i}: bad coverage weight"
                        )));
                    }
                }
            }
        }
        // Coverage must flow: an internal node's weight is the sum of its
        // children's, up to summation-order rounding.
        for (i, node) in nodes.iter().enumerate() {
            if let TreeNode::Internal {
                left,
                right,
                coverage_weight,
                ..
            } = node
            {
                let child_sum =
                    nodes[*left].coverage_weight() + nodes[*right].coverage_weight();
                if (child_sum - coverage_weight).abs() > 1e-9 * coverage_weight.max(1.0) {
                    return Err(Error::CorruptModel(format!(
                        "node {i}: coverage weight {coverage_weight} != children sum {child_sum}"
                    )));
                }
            }
        }
        Ok(DecisionTree {
            nodes,
            bootstrap_seed,
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Route a record to its unique leaf and return the leaf value.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value, .. } => return Ok(*value),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    let v = *features.get(*feature).ok_or_else(|| Error::FeatureMismatch {
                        expected: format!("feature index {feature}"),
                        got: format!("{} features", features.len()),
                    })?;
                    idx = if v < *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Largest feature index referenced by any split, if any.
    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Internal { feature, .. } => Some(*feature),
                TreeNode::Leaf { .. } => None,
            })
            .max()
    }
}

/// A trained ensemble. Prediction is the arithmetic mean of the tree
/// predictions; the struct is immutable after training and safe to share
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<DecisionTree>,
    config: ForestConfig,
    feature_names: Vec<String>,
    /// Weighted mean target of the training set, kept as a summary.
    training_target_mean: f64,
}

impl Forest {
    /// Assemble a forest from explicit trees (used for fixtures and by
    /// the model-file loader). `config.n_trees` must match.
    pub fn from_parts(
        trees: Vec<DecisionTree>,
        config: ForestConfig,
        feature_names: Vec<String>,
        training_target_mean: f64,
    ) -> Result<Forest> {
        if trees.is_empty() {
            return Err(Error::CorruptModel("forest has no trees".into()));
        }
        if config.n_trees != trees.len() {
            return Err(Error::CorruptModel(format!(
                "config says {} trees, found {}",
                config.n_trees,
                trees.len()
            )));
        }
        for (t, tree) in trees.iter().enumerate() {
            if let Some(max) = tree.max_feature_index() {
                if max >= feature_names.len() {
                    return Err(Error::CorruptModel(format!(
                        "tree {t} splits on feature {max}, but only {} features are named",
                        feature_names.len()
                    )));
                }
            }
        }
        Ok(Forest {
            trees,
            config,
            feature_names,
            training_target_mean,
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn training_target_mean(&self) -> f64 {
        self.training_target_mean
    }

    fn check_arity(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.n_features() {
            return Err(Error::FeatureMismatch {
                expected: format!("{} features", self.n_features()),
                got: format!("{}", features.len()),
            });
        }
        Ok(())
    }

    /// Mean of the tree predictions.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        self.check_arity(features)?;
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict(features)?;
        }
        Ok(sum / self.trees.len() as f64)
    }

    /// Prediction for a county record, looking features up by name.
    pub fn predict_record(&self, record: &CountyRecord) -> Result<f64> {
        let features = self.record_features(record)?;
        self.predict(&features)
    }

    pub fn record_features(&self, record: &CountyRecord) -> Result<Vec<f64>> {
        self.feature_names
            .iter()
            .map(|name| {
                record.numeric(name).ok_or_else(|| Error::UnknownColumn {
                    name: name.clone(),
                })
            })
            .collect()
    }

    /// Predictions for every row of a frame, parallel across rows.
    pub fn predict_frame(&self, frame: &ModelFrame) -> Result<Vec<f64>> {
        if frame.feature_names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.join(","),
                got: frame.feature_names().join(","),
            });
        }
        (0..frame.n_rows())
            .into_par_iter()
            .map(|i| self.predict(frame.row(i)))
            .collect()
    }
}
