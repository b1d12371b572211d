use log::debug;

use super::{FeatureRanking, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Indices of the `k` nearest candidates, by (distance, index).
fn nearest(candidates: &mut [(f64, usize)], k: usize) -> &[(f64, usize)] {
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k, cmp);
    }
    let len = k.min(candidates.len());
    let head = &mut candidates[..len];
    head.sort_by(cmp);
    head
}

/// ReliefF over min-max normalized features with Manhattan distance.
///
/// Samples `0..iterations` (all of them by default) are visited in index
/// order. The neighbour count is lowered per class when a class is too
/// small to supply `k_neighbors` hits or misses.
pub fn rank_relieff(
    train: &Dataset,
    k_neighbors: usize,
    iterations: Option<usize>,
) -> Result<FeatureRanking> {
    train.require_both_classes()?;
    if k_neighbors == 0 {
        return Err(Error::InvalidParameter("ReliefF needs k >= 1".into()));
    }
    let s = train.n_samples();
    let n = train.n_features();
    let m = iterations.unwrap_or(s).clamp(1, s);

    // row-major, min-max scaled; constant features become all zeros
    let mut rows = vec![0.0; s * n];
    for j in 0..n {
        let col = train.column(j);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let range = hi - lo;
        if range > 0.0 {
            for (i, &v) in col.iter().enumerate() {
                rows[i * n + j] = (v - lo) / range;
            }
        }
    }
    let labels = train.labels();
    let counts = train.class_counts();

    let mut weights = vec![0.0; n];
    let mut hits = Vec::with_capacity(s);
    let mut misses = Vec::with_capacity(s);
    for i in 0..m {
        let ri = &rows[i * n..(i + 1) * n];
        let own = usize::from(labels[i]);
        hits.clear();
        misses.clear();
        for (j, rj) in rows.chunks_exact(n).enumerate() {
            if j == i {
                continue;
            }
            let d: f64 = ri.iter().zip(rj).map(|(a, b)| (a - b).abs()).sum();
            if usize::from(labels[j]) == own {
                hits.push((d, j));
            } else {
                misses.push((d, j));
            }
        }
        let k_hit = k_neighbors.min(counts[own] - 1);
        let k_miss = k_neighbors.min(counts[1 - own]);
        if k_hit < k_neighbors || k_miss < k_neighbors {
            debug!("ReliefF: k lowered to {k_hit} hits / {k_miss} misses for class {own}");
        }

        for (set, k, sign) in [(&mut hits, k_hit, -1.0), (&mut misses, k_miss, 1.0)] {
            if k == 0 {
                continue;
            }
            let scale = sign / (k as f64 * m as f64);
            for &(_, j) in nearest(set, k) {
                let rj = &rows[j * n..(j + 1) * n];
                for f in 0..n {
                    weights[f] += scale * (ri[f] - rj[f]).abs();
                }
            }
        }
    }
    Ok(FeatureRanking::from_scores(weights, Method::ReliefF))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn relevant_plus_noise(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let relevant: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
        let noise: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let constant = vec![4.0; 100];
        Dataset::from_columns(&[noise, relevant.clone(), constant, relevant], y).unwrap()
    }

    #[test]
    fn relevant_beats_noise() {
        let r = rank_relieff(&relevant_plus_noise(3), 10, None).unwrap();
        assert!(r.scores[1] > r.scores[0]);
        assert_eq!(r.scores[2], 0.0);
        assert!((r.scores[1] - r.scores[3]).abs() <= 1e-12);
        assert_eq!(&r.order[..2], &[1, 3]);
    }

    #[test]
    fn small_class_lowers_k() {
        let d = Dataset::from_columns(
            &[vec![0.0, 0.1, 0.2, 1.0, 0.9], vec![0.5, 0.1, 0.9, 0.3, 0.7]],
            vec![0, 0, 0, 1, 1],
        )
        .unwrap();
        let r = rank_relieff(&d, 10, None).unwrap();
        assert!(r.scores.iter().all(|w| w.is_finite()));
        assert_eq!(r.order[0], 0);
    }

    #[test]
    fn weights_bounded() {
        let r = rank_relieff(&relevant_plus_noise(9), 5, Some(40)).unwrap();
        assert!(r.scores.iter().all(|w| w.abs() <= 1.0 + 1e-12));
    }
}
