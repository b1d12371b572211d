use nalgebra::{DMatrix, DVector};

use super::{order_by_score_desc, FeatureRanking, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{average_ranks, pearson, sample_std};

/// Relative resolution used when ordering path-energy scores; differences
/// below it are inversion round-off and are treated as ties.
const SCORE_RESOLUTION: f64 = 1e-10;

/// Path-integral energy of every node: row sums of `(I - rA)^{-1} - I` with
/// `r = r_factor / spectral_radius(A)`. `adjacency` must be symmetric.
pub fn infinite_scores_from_adjacency(adjacency: &DMatrix<f64>, r_factor: f64) -> Result<Vec<f64>> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: adjacency.ncols(),
        });
    }
    let radius = adjacency
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()));
    if radius <= f64::MIN_POSITIVE {
        // no edges carry weight; every path sum is zero
        return Ok(vec![0.0; n]);
    }
    let r = r_factor / radius;
    let system = DMatrix::<f64>::identity(n, n) - adjacency * r;
    let ones = DVector::<f64>::from_element(n, 1.0);
    let solved = system
        .lu()
        .solve(&ones)
        .ok_or(Error::Singular("I - rA in infinite feature selection"))?;
    Ok(solved.iter().map(|v| v - 1.0).collect())
}

/// Feature adjacency mixing normalized spread and rank decorrelation.
pub(crate) fn adjacency(train: &Dataset, alpha: f64) -> DMatrix<f64> {
    let n = train.n_features();
    let stds: Vec<f64> = (0..n).map(|j| sample_std(train.column(j))).collect();
    let (lo, hi) = stds
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let spread: Vec<f64> = stds
        .iter()
        .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect();
    let ranks: Vec<Vec<f64>> = (0..n).map(|j| average_ranks(train.column(j))).collect();

    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let rho = if i == j {
                1.0
            } else {
                pearson(&ranks[i], &ranks[j])
            };
            let w = alpha * spread[i].max(spread[j]) + (1.0 - alpha) * (1.0 - rho.abs());
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    a
}

/// Infinite feature selection: features that sit on many strong paths of
/// the adjacency graph rank first.
pub fn rank_infinite(train: &Dataset, alpha: f64, r_factor: f64) -> Result<FeatureRanking> {
    train.require_both_classes()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in [0, 1], got {alpha}"
        )));
    }
    if !(r_factor > 0.0 && r_factor < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r_factor must be in (0, 1), got {r_factor}"
        )));
    }
    let scores = infinite_scores_from_adjacency(&adjacency(train, alpha), r_factor)?;
    let scale = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let order = if scale > 0.0 {
        let quantized: Vec<f64> = scores
            .iter()
            .map(|s| (s / (scale * SCORE_RESOLUTION)).round())
            .collect();
        order_by_score_desc(&quantized)
    } else {
        (0..scores.len()).collect()
    };
    Ok(FeatureRanking {
        order,
        scores,
        method: Method::Ifs,
    })
}
