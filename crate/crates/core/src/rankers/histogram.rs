//! Equal-width histogram estimators for entropy and mutual information.
//! All logarithms are natural, so results are in nats.

use crate::error::{Error, Result};

/// Bin range of `x`: `(min, width, bins)`. A constant input collapses to a
/// single bin.
fn binning(x: &[f64], bins: usize) -> (f64, f64, usize) {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if x.is_empty() || hi <= lo {
        return (lo, 0.0, 1);
    }
    (lo, (hi - lo) / bins as f64, bins)
}

/// Equal-width bin index of each value over `[min, max]`; the maximum falls
/// in the last bin.
pub fn discretize(x: &[f64], bins: usize) -> Vec<usize> {
    let (lo, width, nb) = binning(x, bins);
    if nb == 1 {
        return vec![0; x.len()];
    }
    x.iter()
        .map(|&v| (((v - lo) / width) as usize).min(nb - 1))
        .collect()
}

/// Shannon entropy of the equal-width histogram of `x`.
pub fn entropy(x: &[f64], bins: usize) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut counts = vec![0usize; bins.max(1)];
    for b in discretize(x, bins) {
        counts[b] += 1;
    }
    entropy_of_counts(&counts, x.len())
}

fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Joint counts of a discretized feature against the binary class.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    /// `counts[b][c]`: samples in feature bin `b` with class `c`.
    pub counts: Vec<[usize; 2]>,
    /// `counts.len() + 1` strictly increasing bin edges.
    pub edges: Vec<f64>,
}

impl Histogram2D {
    pub fn new(x: &[f64], y: &[u8], bins: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "bins must be at least 2, got {bins}"
            )));
        }
        let (lo, width, nb) = binning(x, bins);
        let edges = if nb == 1 {
            let v = if lo.is_finite() { lo } else { 0.0 };
            vec![v - 0.5, v + 0.5]
        } else {
            (0..=nb).map(|i| lo + width * i as f64).collect()
        };
        let mut counts = vec![[0usize; 2]; nb];
        for (b, &c) in discretize(x, bins).into_iter().zip(y) {
            counts[b][usize::from(c != 0)] += 1;
        }
        Ok(Histogram2D { counts, edges })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|c| c[0] + c[1]).sum()
    }

    pub fn mutual_information(&self) -> f64 {
        let n = self.total() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let class = [
            self.counts.iter().map(|c| c[0]).sum::<usize>() as f64 / n,
            self.counts.iter().map(|c| c[1]).sum::<usize>() as f64 / n,
        ];
        let mut mi = 0.0;
        for cell in &self.counts {
            let pb = (cell[0] + cell[1]) as f64 / n;
            for c in 0..2 {
                if cell[c] > 0 {
                    let p = cell[c] as f64 / n;
                    mi += p * (p / (pb * class[c])).ln();
                }
            }
        }
        mi.max(0.0)
    }
}

/// Mutual information between a real feature and binary labels, with the
/// feature discretized into `bins` equal-width bins.
pub fn mutual_information(x: &[f64], y: &[u8], bins: usize) -> Result<f64> {
    Ok(Histogram2D::new(x, y, bins)?.mutual_information())
}

/// Mutual information between two already-discretized variables.
pub(crate) fn mutual_information_codes(a: &[usize], na: usize, b: &[usize], nb: usize) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut joint = vec![0usize; na * nb];
    let mut ma = vec![0usize; na];
    let mut mb = vec![0usize; nb];
    for (&i, &j) in a.iter().zip(b) {
        joint[i * nb + j] += 1;
        ma[i] += 1;
        mb[j] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for i in 0..na {
        for j in 0..nb {
            let c = joint[i * nb + j];
            if c > 0 {
                let p = c as f64 / nf;
                mi += p * (c as f64 * nf / (ma[i] as f64 * mb[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}
