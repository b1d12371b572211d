//! The six dataset-level meta-features: sample count, feature count,
//! average asymmetry, average inter-feature correlation, average coefficient
//! of variation and average entropy. None of them look at the labels.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::rankers::entropy;
use crate::stats::{mean, median, pearson, sample_std};

pub const META_FEATURE_NAMES: [&str; 6] = ["ns", "nf", "aaf", "acf", "acvf", "aef"];

/// Default equal-width bin count for feature entropy.
pub const DEFAULT_ENTROPY_BINS: usize = 10;

/// Feature means closer to zero than this contribute nothing to ACVF.
const MEAN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub ns: usize,
    pub nf: usize,
    pub aaf: f64,
    pub acf: f64,
    pub acvf: f64,
    pub aef: f64,
}

impl MetaFeatureVector {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.ns as f64,
            self.nf as f64,
            self.aaf,
            self.acf,
            self.acvf,
            self.aef,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        MetaFeatureVector {
            ns: v[0].round() as usize,
            nf: v[1].round() as usize,
            aaf: v[2],
            acf: v[3],
            acvf: v[4],
            aef: v[5],
        }
    }
}

/// Pearson's asymmetry: `3/N Σ (mean - median) / std`. Zero-variance
/// features contribute 0.
pub fn compute_aaf(data: &Dataset) -> f64 {
    let n = data.n_features();
    let total: f64 = (0..n)
        .map(|j| {
            let col = data.column(j);
            let sd = sample_std(col);
            if sd > 0.0 {
                (mean(col) - median(col)) / sd
            } else {
                0.0
            }
        })
        .sum();
    3.0 * total / n as f64
}

/// Mean Pearson correlation over all unordered feature pairs; 0 for a
/// single feature.
pub fn compute_acf(data: &Dataset) -> f64 {
    let n = data.n_features();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for j in 0..n - 1 {
        for k in j + 1..n {
            total += pearson(data.column(j), data.column(k));
        }
    }
    2.0 * total / (n * (n - 1)) as f64
}

/// Mean signed coefficient of variation `std / mean`.
pub fn compute_acvf(data: &Dataset) -> f64 {
    let n = data.n_features();
    let total: f64 = (0..n)
        .map(|j| {
            let col = data.column(j);
            let m = mean(col);
            if m.abs() < MEAN_EPSILON {
                0.0
            } else {
                sample_std(col) / m
            }
        })
        .sum();
    total / n as f64
}

/// Mean equal-width histogram entropy of the features, in nats.
pub fn compute_aef(data: &Dataset, bins: usize) -> f64 {
    let n = data.n_features();
    let total: f64 = (0..n).map(|j| entropy(data.column(j), bins)).sum();
    total / n as f64
}

pub fn extract_meta(data: &Dataset) -> MetaFeatureVector {
    extract_meta_with_bins(data, DEFAULT_ENTROPY_BINS)
}

pub fn extract_meta_with_bins(data: &Dataset, bins: usize) -> MetaFeatureVector {
    MetaFeatureVector {
        ns: data.n_samples(),
        nf: data.n_features(),
        aaf: compute_aaf(data),
        acf: compute_acf(data),
        acvf: compute_acvf(data),
        aef: compute_aef(data, bins),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(c: &[&[f64]]) -> Dataset {
        let s = c[0].len();
        let labels = (0..s).map(|i| (i % 2) as u8).collect();
        Dataset::from_columns(&c.iter().map(|v| v.to_vec()).collect::<Vec<_>>(), labels).unwrap()
    }

    #[test]
    fn aaf_examples() {
        assert_eq!(
            compute_aaf(&cols(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]])),
            0.0
        );
        let skewed = cols(&[&[1.0, 2.0, 3.0, 10.0]]);
        let expected = 3.0 * 1.5 / (50.0f64 / 3.0).sqrt();
        assert!((compute_aaf(&skewed) - expected).abs() < 1e-12);
        assert!((compute_aaf(&skewed) - 1.1023).abs() < 1e-4);
        let both = cols(&[&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 10.0]]);
        assert!((compute_aaf(&both) - expected / 2.0).abs() < 1e-12);
    }

    #[test]
    fn acf_examples() {
        let f = [1.0, 3.0, 2.0, 5.0];
        let g: Vec<f64> = f.iter().map(|v| -v).collect();
        assert!((compute_acf(&cols(&[&f, &f])) - 1.0).abs() < 1e-12);
        assert!((compute_acf(&cols(&[&f, &g])) + 1.0).abs() < 1e-12);
        assert!((compute_acf(&cols(&[&f, &f, &g])) + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(compute_acf(&cols(&[&f])), 0.0);
    }

    #[test]
    fn acvf_examples() {
        assert_eq!(compute_acvf(&cols(&[&[5.0, 5.0, 5.0]])), 0.0);
        assert!((compute_acvf(&cols(&[&[1.0, 2.0, 3.0]])) - 0.5).abs() < 1e-15);
        assert!((compute_acvf(&cols(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]])) - 0.5).abs() < 1e-15);
        assert_eq!(compute_acvf(&cols(&[&[-1.0, 0.0, 1.0]])), 0.0);
    }

    #[test]
    fn aef_examples() {
        assert_eq!(compute_aef(&cols(&[&[2.0; 4]]), 10), 0.0);
        let two = compute_aef(&cols(&[&[0.0, 1.0, 0.0, 1.0]]), 2);
        assert!((two - std::f64::consts::LN_2).abs() < 1e-12);
        let spread: Vec<f64> = (0..50).map(|i| (i % 10) as f64).collect();
        assert!((compute_aef(&cols(&[&spread]), 10) - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn two_by_one_dataset() {
        let d = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![0, 1]).unwrap();
        let m = extract_meta(&d);
        assert_eq!((m.ns, m.nf), (2, 1));
        assert_eq!(m.aaf, 0.0);
        assert_eq!(m.acf, 0.0);
        assert!((m.acvf - 2f64.sqrt()).abs() < 1e-12);
        // one value in the first bin, one in the last
        assert!((m.aef - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn labels_are_ignored() {
        let d = cols(&[&[1.0, 7.0, 2.0, 9.0, 4.0], &[3.0, 1.0, 4.0, 1.0, 5.0]]);
        let flipped = d.with_labels(vec![1, 1, 0, 0, 1]).unwrap();
        assert_eq!(extract_meta(&d), extract_meta(&flipped));
    }
}
