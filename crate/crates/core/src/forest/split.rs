//! Best-split search: weighted variance reduction over midpoint
//! thresholds of the candidate features.
//!
//! For a node with weighted target sum S and weight W split into (L, R),
//! the reduction V(parent) − [W_L·V(L) + W_R·V(R)] / W simplifies to
//! (S_L²/W_L + S_R²/W_R − S²/W) / W, which a single prefix scan over the
//! rows sorted by feature value evaluates exactly.

use crate::data::ModelFrame;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
    pub reduction: f64,
}

/// The (feature, threshold) pair maximizing weighted variance reduction,
/// or `None` when no split strictly reduces variance. Ties break toward
/// the lowest feature index, then the smallest threshold.
pub(crate) fn best_split(
    frame: &ModelFrame,
    rows: &[usize],
    candidates: &[usize],
) -> Option<SplitRule> {
    if rows.len() < 2 {
        return None;
    }
    let y0 = frame.target()[rows[0]];
    if rows.iter().all(|&i| frame.target()[i] == y0) {
        return None;
    }

    let mut ordered: Vec<usize> = candidates.to_vec();
    ordered.sort_unstable();
    ordered.dedup();

    let weights = frame.weight();
    let targets = frame.target();
    let mut total_w = 0.0;
    let mut total_s = 0.0;
    for &i in rows {
        total_w += weights[i];
        total_s += weights[i] * targets[i];
    }
    let parent_term = total_s * total_s / total_w;

    let mut best: Option<SplitRule> = None;
    let mut points: Vec<(f64, f64, f64)> = Vec::with_capacity(rows.len());
    for &feature in &ordered {
        points.clear();
        points.extend(
            rows.iter()
                .map(|&i| (frame.value(i, feature), weights[i], weights[i] * targets[i])),
        );
        points.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

        let mut w_left = 0.0;
        let mut s_left = 0.0;
        for i in 0..points.len() - 1 {
            w_left += points[i].1;
            s_left += points[i].2;
            if points[i].0 >= points[i + 1].0 {
                continue;
            }
            let threshold = 0.5 * (points[i].0 + points[i + 1].0);
            // A midpoint that rounds down onto the left value would leave
            // the left child empty under the `<` routing rule.
            if threshold <= points[i].0 {
                continue;
            }
            let w_right = total_w - w_left;
            let s_right = total_s - s_left;
            let reduction =
                (s_left * s_left / w_left + s_right * s_right / w_right - parent_term) / total_w;
            let better = match &best {
                None => reduction > 0.0,
                Some(b) => reduction > b.reduction,
            };
            if better {
                best = Some(SplitRule {
                    feature,
                    threshold,
                    reduction,
                });
            }
        }
    }
    best
}
