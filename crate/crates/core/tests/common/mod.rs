//! Fixtures and naive reference implementations shared by the integration
//! tests. The references are deliberately written the slow, literal way and
//! share no code with the library.

#![allow(dead_code)]

use fsmeta_core::fuzzy::{MetaDataset, MetaRow};
use fsmeta_core::{Dataset, MetaFeatureVector, Method};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Balanced binary labels, one feature equal to the label and nine uniform
/// [0, 1) noise features. Returns the dataset and the label-copy column.
pub fn label_copy_dataset(seed: u64, samples: usize) -> (Dataset, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u8> = (0..samples).map(|i| (i % 2) as u8).collect();
    labels.shuffle(&mut rng);
    let copy_at = (seed % 10) as usize;
    let columns: Vec<Vec<f64>> = (0..10)
        .map(|j| {
            if j == copy_at {
                labels.iter().map(|&l| f64::from(l)).collect()
            } else {
                (0..samples).map(|_| rng.random::<f64>()).collect()
            }
        })
        .collect();
    (Dataset::from_columns(&columns, labels).unwrap(), copy_at)
}

/// A dataset of the given shape and class split: the first two features
/// shift with the class, the rest are Gaussian noise.
pub fn shaped_dataset(seed: u64, features: usize, negatives: usize, positives: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u8> = std::iter::repeat_n(0u8, negatives)
        .chain(std::iter::repeat_n(1u8, positives))
        .collect();
    labels.shuffle(&mut rng);
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| {
            (0..features)
                .map(|j| {
                    let noise: f64 = rng.sample(rand_distr::StandardNormal);
                    if j < 2 {
                        noise + 1.5 * f64::from(l)
                    } else {
                        noise
                    }
                })
                .collect()
        })
        .collect();
    Dataset::from_rows(&rows, labels).unwrap()
}

/// Four tight clusters in meta-feature space, each high on different
/// coordinates, one per method.
pub fn clustered_meta_dataset(seed: u64, per_cluster: usize) -> MetaDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (c, &label) in Method::ALL.iter().enumerate() {
        for r in 0..per_cluster {
            let high = |p: usize| p % 4 == c;
            let mut jitter = |scale: f64| rng.random_range(-scale..scale);
            let meta = MetaFeatureVector {
                ns: if high(0) { 900 } else { 100 } + (jitter(5.0) as i64 + 5) as usize,
                nf: if high(1) { 70 } else { 10 } + (jitter(2.0) as i64 + 2) as usize,
                aaf: if high(2) { 1.0 } else { -1.0 } + jitter(0.02),
                acf: if high(3) { 0.8 } else { 0.0 } + jitter(0.02),
                acvf: if high(4) { 40.0 } else { 1.0 } + jitter(0.5),
                aef: if high(5) { 2.2 } else { 0.5 } + jitter(0.02),
            };
            rows.push(MetaRow {
                meta,
                label,
                source: format!("c{c}_{r}"),
            });
        }
    }
    MetaDataset { rows }
}

pub fn naive_mean(x: &[f64]) -> f64 {
    let mut total = 0.0;
    for v in x {
        total += v;
    }
    total / x.len() as f64
}

pub fn naive_std(x: &[f64]) -> f64 {
    let m = naive_mean(x);
    let mut ss = 0.0;
    for v in x {
        ss += (v - m) * (v - m);
    }
    (ss / (x.len() as f64 - 1.0)).sqrt()
}

pub fn naive_median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (naive_mean(x), naive_mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Histogram entropy with explicit bin edges `min + k (max - min) / bins`,
/// the last bin closed.
pub fn naive_entropy(x: &[f64], bins: usize) -> f64 {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return 0.0;
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|k| lo + k as f64 * (hi - lo) / bins as f64)
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in x {
        let mut b = bins - 1;
        for k in 0..bins {
            if v >= edges[k] && v < edges[k + 1] {
                b = k;
                break;
            }
        }
        counts[b] += 1;
    }
    let n = x.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| -(c as f64 / n) * (c as f64 / n).ln())
        .sum()
}

/// `[aaf, acf, acvf, aef]` computed column by column from the raw rows.
pub fn naive_meta(rows: &[Vec<f64>], bins: usize) -> [f64; 4] {
    let n = rows[0].len();
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let mut aaf = 0.0;
    let mut acvf = 0.0;
    let mut aef = 0.0;
    for j in 0..n {
        let c = col(j);
        let sd = naive_std(&c);
        if sd > 0.0 {
            aaf += 3.0 * (naive_mean(&c) - naive_median(&c)) / sd;
        }
        let m = naive_mean(&c);
        if m.abs() >= 1e-12 {
            acvf += sd / m;
        }
        aef += naive_entropy(&c, bins);
    }
    let mut acf = 0.0;
    if n > 1 {
        let mut pairs = 0usize;
        for a in 0..n {
            for b in a + 1..n {
                acf += naive_pearson(&col(a), &col(b));
                pairs += 1;
            }
        }
        acf /= pairs as f64;
    }
    [aaf / n as f64, acf, acvf / n as f64, aef / n as f64]
}

/// Random dataset with S in [4, max_s] and N in [1, max_n], both classes
/// present, values on random per-column scales and offsets.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    max_s: usize,
    max_n: usize,
) -> (Vec<Vec<f64>>, Dataset) {
    let s = rng.random_range(4..=max_s);
    let n = rng.random_range(1..=max_n);
    let scales: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.1..10.0), rng.random_range(-5.0..5.0)))
        .collect();
    let rows: Vec<Vec<f64>> = (0..s)
        .map(|_| {
            scales
                .iter()
                .map(|&(scale, offset)| {
                    let u: f64 = rng.random();
                    // squaring skews some columns
                    offset + scale * if offset > 0.0 { u * u } else { u }
                })
                .collect()
        })
        .collect();
    let mut labels: Vec<u8> = (0..s).map(|i| (i % 2) as u8).collect();
    labels.shuffle(rng);
    let data = Dataset::from_rows(&rows, labels).unwrap();
    (rows, data)
}
