//! Forest training: per-tree ChaCha streams derived from (seed, tree
//! index), weighted bootstrap draws, and recursive variance-reduction
//! growth. Trees train in parallel with no shared mutable state, so the
//! result does not depend on scheduling.

use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::ModelFrame;
use crate::error::{Error, Result};
use crate::forest::{best_split, DecisionTree, Forest, ForestConfig, TreeNode};
use crate::seed::derive_seed;

/// Per-tree wall-clock timings from a training run.
#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub per_tree_seconds: Vec<f64>,
    pub total_seconds: f64,
}

pub fn train_forest(frame: &ModelFrame, config: &ForestConfig) -> Result<Forest> {
    train_forest_with_log(frame, config).map(|(forest, _)| forest)
}

pub fn train_forest_with_log(
    frame: &ModelFrame,
    config: &ForestConfig,
) -> Result<(Forest, TrainingLog)> {
    if frame.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = frame.n_features();
    if m == 0 {
        return Err(Error::InvalidConfig("no features to train on".into()));
    }
    frame.require_positive_weights()?;
    config.validate(m)?;
    let mtry = config.resolved_mtry(m);

    let sampler = WeightedIndex::new(frame.weight().iter().copied())
        .map_err(|e| Error::InvalidConfig(format!("bad weights: {e}")))?;

    let started = Instant::now();
    let ctx = GrowContext {
        frame,
        min_node_size: config.min_node_size,
        max_depth: config.max_depth,
        mtry,
    };
    let timed: Vec<(DecisionTree, f64)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_started = Instant::now();
            let tree_seed = derive_seed(config.seed, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let rows = bootstrap_rows(&sampler, frame.n_rows(), &mut rng);
            let mut nodes = Vec::new();
            grow(&ctx, rows, 0, &mut nodes, &mut rng);
            (
                DecisionTree {
                    nodes,
                    bootstrap_seed: tree_seed,
                },
                tree_started.elapsed().as_secs_f64(),
            )
        })
        .collect();

    let mut trees = Vec::with_capacity(timed.len());
    let mut log = TrainingLog {
        per_tree_seconds: Vec::with_capacity(timed.len()),
        total_seconds: 0.0,
    };
    for (tree, secs) in timed {
        trees.push(tree);
        log.per_tree_seconds.push(secs);
    }
    log.total_seconds = started.elapsed().as_secs_f64();

    let forest = Forest::from_parts(
        trees,
        config.clone(),
        frame.feature_names().to_vec(),
        frame.weighted_target_mean(),
    )?;
    Ok((forest, log))
}

/// N draws with replacement, selection probability proportional to the
/// population weight.
pub(crate) fn bootstrap_rows(
    sampler: &WeightedIndex<f64>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    (0..n).map(|_| sampler.sample(rng)).collect()
}

struct GrowContext<'a> {
    frame: &'a ModelFrame,
    min_node_size: usize,
    max_depth: Option<usize>,
    mtry: usize,
}

fn node_stats(frame: &ModelFrame, rows: &[usize]) -> (f64, f64) {
    let mut w_sum = 0.0;
    let mut wy_sum = 0.0;
    for &i in rows {
        w_sum += frame.weight()[i];
        wy_sum += frame.weight()[i] * frame.target()[i];
    }
    (w_sum, wy_sum / w_sum)
}

fn grow(
    ctx: &GrowContext<'_>,
    rows: Vec<usize>,
    depth: usize,
    nodes: &mut Vec<TreeNode>,
    rng: &mut ChaCha8Rng,
) -> usize {
    let (w_sum, mean) = node_stats(ctx.frame, &rows);
    let y0 = ctx.frame.target()[rows[0]];
    let pure = rows.iter().all(|&i| ctx.frame.target()[i] == y0);
    let at_depth_limit = ctx.max_depth.is_some_and(|d| depth >= d);
    let stop = rows.len() <= ctx.min_node_size || pure || at_depth_limit;

    let rule = if stop {
        None
    } else {
        let candidates =
            rand::seq::index::sample(rng, ctx.frame.n_features(), ctx.mtry).into_vec();
        best_split(ctx.frame, &rows, &candidates)
    };

    match rule {
        None => {
            let idx = nodes.len();
            nodes.push(TreeNode::Leaf {
                value: mean,
                coverage_weight: w_sum,
                n_rows: rows.len(),
            });
            idx
        }
        Some(rule) => {
            let idx = nodes.len();
            // Reserve the slot; children land at larger indices.
            nodes.push(TreeNode::Leaf {
                value: mean,
                coverage_weight: w_sum,
                n_rows: rows.len(),
            });
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .into_iter()
                .partition(|&i| ctx.frame.value(i, rule.feature) < rule.threshold);
            let left = grow(ctx, left_rows, depth + 1, nodes, rng);
            let right = grow(ctx, right_rows, depth + 1, nodes, rng);
            nodes[idx] = TreeNode::Internal {
                feature: rule.feature,
                threshold: rule.threshold,
                left,
                right,
                coverage_weight: w_sum,
            };
            idx
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn synth_frame(n: usize, m: usize, seed: u64) -> ModelFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            let mut target = 0.6 - 0.3 * row[0];
            if m > 1 {
                target += 0.4 * row[0] * row[1];
            }
            y.push(target + 0.01 * rng.random_range(-1.0..1.0));
            w.push(rng.random_range(1.0..500.0));
            rows.push(row);
        }
        let names = (0..m).map(|j| format!("x{j}")).collect();
        ModelFrame::new(names, rows, y, w, None).unwrap()
    }

    #[test]
    fn degenerate_stopping_rule_gives_a_single_leaf() {
        let frame = synth_frame(30, 3, 1);
        let config = ForestConfig {
            n_trees: 1,
            min_node_size: 30,
            mtry: Some(3),
            seed: 0,
            max_depth: None,
        };
        let forest = train_forest(&frame, &config).unwrap();
        let tree = &forest.trees()[0];
        assert_eq!(tree.nodes().len(), 1);
        // The single leaf predicts its bootstrap sample's weighted mean
        // for every input.
        let p1 = forest.predict(&[0.0, 0.0, 0.0]).unwrap();
        let p2 = forest.predict(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn same_seed_trains_identical_forests() {
        let frame = synth_frame(60, 4, 2);
        let config = ForestConfig {
            n_trees: 8,
            min_node_size: 5,
            mtry: None,
            seed: 42,
            max_depth: None,
        };
        let a = train_forest(&frame, &config).unwrap();
        let b = train_forest(&frame, &config).unwrap();
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    }

    #[test]
    fn different_seeds_train_different_forests() {
        let frame = synth_frame(60, 4, 2);
        let mut config = ForestConfig {
            n_trees: 4,
            min_node_size: 5,
            mtry: None,
            seed: 1,
            max_depth: None,
        };
        let a = train_forest(&frame, &config).unwrap();
        config.seed = 2;
        let b = train_forest(&frame, &config).unwrap();
        assert_ne!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    }

    #[test]
    fn predictions_stay_within_training_target_range() {
        let frame = synth_frame(100, 3, 7);
        let lo = frame.target().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = frame
            .target()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let config = ForestConfig {
            n_trees: 20,
            min_node_size: 5,
            mtry: None,
            seed: 3,
            max_depth: None,
        };
        let forest = train_forest(&frame, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..2.0)).collect();
            let p = forest.predict(&x).unwrap();
            assert!(p >= lo && p <= hi, "prediction {p} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn bootstrap_draw_shares_follow_weights() {
        // Two rows weighted 10:1; over 10,000 draws the heavy row's share
        // must pass a χ² test against 10/11 at the 0.001 level.
        let sampler = WeightedIndex::new([10.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let draws = 10_000;
        let rows = bootstrap_rows(&sampler, draws, &mut rng);
        let heavy = rows.iter().filter(|&&r| r == 0).count() as f64;
        let light = draws as f64 - heavy;
        let exp_heavy = draws as f64 * 10.0 / 11.0;
        let exp_light = draws as f64 * 1.0 / 11.0;
        let chi2 = (heavy - exp_heavy).powi(2) / exp_heavy
            + (light - exp_light).powi(2) / exp_light;
        assert!(chi2 < 10.83, "χ² = {chi2} exceeds the 0.001 critical value");
    }

    #[test]
    fn max_depth_caps_the_tree() {
        let frame = synth_frame(200, 3, 4);
        let config = ForestConfig {
            n_trees: 2,
            min_node_size: 1,
            mtry: Some(3),
            seed: 5,
            max_depth: Some(2),
        };
        let forest = train_forest(&frame, &config).unwrap();
        for tree in forest.trees() {
            fn depth(nodes: &[TreeNode], idx: usize) -> usize {
                match &nodes[idx] {
                    TreeNode::Leaf { .. } => 0,
                    TreeNode::Internal { left, right, .. } => {
                        1 + depth(nodes, *left).max(depth(nodes, *right))
                    }
                }
            }
            assert!(depth(tree.nodes(), 0) <= 2);
        }
    }

    #[test]
    fn leaf_values_match_the_routed_bootstrap_rows() {
        // Regenerate each tree's bootstrap sample from its stored seed,
        // route the rows through the finished tree, and check that every
        // leaf holds the weighted mean of its rows and that the
        // coverage-weighted mean of all leaves equals the sample mean.
        let frame = synth_frame(80, 3, 9);
        let config = ForestConfig {
            n_trees: 6,
            min_node_size: 5,
            mtry: None,
            seed: 11,
            max_depth: None,
        };
        let forest = train_forest(&frame, &config).unwrap();
        let sampler = WeightedIndex::new(frame.weight().iter().copied()).unwrap();
        for tree in forest.trees() {
            let mut rng = ChaCha8Rng::seed_from_u64(tree.bootstrap_seed);
            let rows = bootstrap_rows(&sampler, frame.n_rows(), &mut rng);

            let mut acc: std::collections::HashMap<usize, (f64, f64, usize)> =
                std::collections::HashMap::new();
            for &r in &rows {
                let mut idx = 0;
                loop {
                    match &tree.nodes()[idx] {
                        TreeNode::Leaf { .. } => break,
                        TreeNode::Internal {
                            feature,
                            threshold,
                            left,
                            right,
                            ..
                        } => {
                            idx = if frame.value(r, *feature) < *threshold {
                                *left
                            } else {
                                *right
                            };
                        }
                    }
                }
                let e = acc.entry(idx).or_insert((0.0, 0.0, 0));
                e.0 += frame.weight()[r];
                e.1 += frame.weight()[r] * frame.target()[r];
                e.2 += 1;
            }
            for (idx, node) in tree.nodes().iter().enumerate() {
                if let TreeNode::Leaf {
                    value,
                    coverage_weight,
                    n_rows,
                } = node
                {
                    let (w, wy, count) = acc.get(&idx).copied().unwrap_or((0.0, 0.0, 0));
                    assert_eq!(count, *n_rows, "leaf {idx} row count");
                    assert!((w - coverage_weight).abs() <= 1e-9 * w.max(1.0));
                    assert!((wy / w - value).abs() < 1e-10, "leaf {idx} mean");
                }
            }

            let mut sw = 0.0;
            let mut swy = 0.0;
            for &r in &rows {
                sw += frame.weight()[r];
                swy += frame.weight()[r] * frame.target()[r];
            }
            let mut leaf_w = 0.0;
            let mut leaf_wv = 0.0;
            for node in tree.nodes() {
                if let TreeNode::Leaf {
                    value,
                    coverage_weight,
                    ..
                } = node
                {
                    leaf_w += coverage_weight;
                    leaf_wv += coverage_weight * value;
                }
            }
            assert!((leaf_wv / leaf_w - swy / sw).abs() < 1e-10, "tree baseline");
        }
    }

    #[test]
    fn empty_frame_is_rejected() {
        let frame = ModelFrame::new(vec!["x".into()], vec![], vec![], vec![], None).unwrap();
        assert!(matches!(
            train_forest(&frame, &ForestConfig::default()),
            Err(Error::EmptyDataset)
        ));
    }
}
