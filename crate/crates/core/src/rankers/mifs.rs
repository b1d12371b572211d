use super::histogram::{discretize, mutual_information_codes};
use super::{FeatureRanking, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Criterion differences below this count as ties, resolved by lower index.
const TIE_TOLERANCE: f64 = 1e-12;

/// Greedy mutual-information selection with a redundancy penalty.
///
/// The first pick maximizes `I(f; C)`; each later pick maximizes
/// `I(f; C) - beta * Σ_selected I(f; s)`. Selection order is the ranking and
/// each feature's score is its criterion value when it was picked, so
/// scores are non-increasing along `order`.
pub fn rank_mifs(train: &Dataset, beta: f64, bins: usize) -> Result<FeatureRanking> {
    train.require_both_classes()?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "bins must be at least 2, got {bins}"
        )));
    }
    let n = train.n_features();
    let codes: Vec<Vec<usize>> = (0..n).map(|j| discretize(train.column(j), bins)).collect();
    let class: Vec<usize> = train.labels().iter().map(|&l| usize::from(l)).collect();
    let relevance: Vec<f64> = codes
        .iter()
        .map(|c| mutual_information_codes(c, bins, &class, 2))
        .collect();

    let mut redundancy = vec![0.0; n];
    let mut selected = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut scores = vec![0.0; n];
    for _ in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for f in (0..n).filter(|&f| !selected[f]) {
            let crit = relevance[f] - beta * redundancy[f];
            if best.is_none_or(|(_, b)| crit > b + TIE_TOLERANCE) {
                best = Some((f, crit));
            }
        }
        let (pick, crit) = best.expect("an unselected feature remains");
        selected[pick] = true;
        scores[pick] = crit;
        order.push(pick);
        if beta > 0.0 {
            for f in (0..n).filter(|&f| !selected[f]) {
                redundancy[f] += mutual_information_codes(&codes[f], bins, &codes[pick], bins);
            }
        }
    }
    Ok(FeatureRanking {
        order,
        scores,
        method: Method::Mifs,
    })
}
