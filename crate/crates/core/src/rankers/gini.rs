use super::{FeatureRanking, Method};
use crate::data::Dataset;
use crate::error::Result;

/// `1 - Σ p_c²` for a two-class count pair.
pub fn gini_impurity(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (counts[0] as f64 / n, counts[1] as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Largest impurity decrease over binary splits between consecutive
/// distinct values. Zero when the feature is constant.
fn best_split_gain(x: &[f64], y: &[u8]) -> f64 {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    let mut total = [0usize; 2];
    for &l in y {
        total[usize::from(l)] += 1;
    }
    let parent = gini_impurity(total);
    let nf = n as f64;

    let mut left = [0usize; 2];
    let mut best = 0.0f64;
    for w in 0..n - 1 {
        left[usize::from(y[idx[w]])] += 1;
        if x[idx[w]] == x[idx[w + 1]] {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let nl = (w + 1) as f64;
        let weighted = nl / nf * gini_impurity(left) + (nf - nl) / nf * gini_impurity(right);
        best = best.max(parent - weighted);
    }
    best
}

/// Gini-index ranking: each feature scores its best single-split gain.
pub fn rank_gini(train: &Dataset) -> Result<FeatureRanking> {
    train.require_both_classes()?;
    let scores = (0..train.n_features())
        .map(|j| best_split_gain(train.column(j), train.labels()))
        .collect();
    Ok(FeatureRanking::from_scores(scores, Method::Gifs))
}
