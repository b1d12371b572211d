//! Binary logistic regression fitted by full-batch gradient descent with a
//! backtracking (Armijo) line search.

use nalgebra::{DMatrixView, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            l2: 1e-4,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub final_loss: f64,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
fn loss_at(x: &DMatrixView<'_, f64>, y: &[f64], w: &DVector<f64>, b: f64, l2: f64) -> f64 {
    let z = x * w;
    let nll: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| softplus(zi + b) - yi * (zi + b))
        .sum();
    nll / y.len() as f64 + 0.5 * l2 * w.norm_squared()
}

/// Mean negative log-likelihood plus `l2/2 * ||w||²` (bias unpenalized), and
/// its gradient with respect to `(w, b)`.
pub fn loss_and_gradient(
    x: &DMatrixView<'_, f64>,
    y: &[f64],
    w: &DVector<f64>,
    b: f64,
    l2: f64,
) -> (f64, DVector<f64>, f64) {
    let s = y.len() as f64;
    let mut z = x * w;
    let mut nll = 0.0;
    for (zi, &yi) in z.iter_mut().zip(y) {
        let t = *zi + b;
        nll += softplus(t) - yi * t;
        *zi = sigmoid(t) - yi;
    }
    let grad_b = z.sum() / s;
    let mut grad_w = x.tr_mul(&z) / s;
    grad_w.axpy(l2, w, 1.0);
    (nll / s + 0.5 * l2 * w.norm_squared(), grad_w, grad_b)
}

/// Summed NLL at margins `z + b`, also storing `exp(-|z + b|)` per sample
/// so the sigmoid at the same point costs no further exponentials.
fn nll_with_exp(z: &[f64], y: &[f64], b: f64, exp_neg_abs: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..z.len() {
        let t = z[i] + b;
        let e = (-t.abs()).exp();
        exp_neg_abs[i] = e;
        total += t.max(0.0) + e.ln_1p() - y[i] * t;
    }
    total
}

/// Fit from zero initialization. Stops when the gradient norm falls below
/// `tol` or after `max_iter` iterations.
pub fn train_logistic(
    x: DMatrixView<'_, f64>,
    y: &[u8],
    params: &LogisticParams,
) -> Result<LogisticModel> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::DegenerateLabels);
    }
    let (rows, cols) = x.shape();
    let s = rows as f64;
    let l2 = params.l2;
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut w = DVector::<f64>::zeros(cols);
    let mut b = 0.0;
    // margins Xw, kept in step with w so line-search trials need no mat-vec
    let mut z = DVector::<f64>::zeros(rows);
    let mut ez = DVector::<f64>::zeros(rows);
    let mut loss = nll_with_exp(z.as_slice(), &yf, b, ez.as_mut_slice()) / s;

    let mut residual = DVector::<f64>::zeros(rows);
    let mut gw = DVector::<f64>::zeros(cols);
    let mut dz = DVector::<f64>::zeros(rows);
    let mut w_try = DVector::<f64>::zeros(cols);
    let mut z_try = DVector::<f64>::zeros(rows);
    let mut ez_try = DVector::<f64>::zeros(rows);
    let mut step = 1.0;
    let mut grow = true;
    let mut iterations = 0;

    loop {
        if !loss.is_finite() {
            return Err(Error::NonFinite("logistic loss".into()));
        }
        {
            let (zs, es, rs) = (z.as_slice(), ez.as_slice(), residual.as_mut_slice());
            for i in 0..rows {
                let e = es[i];
                let p = if zs[i] + b >= 0.0 {
                    1.0 / (1.0 + e)
                } else {
                    e / (1.0 + e)
                };
                rs[i] = p - yf[i];
            }
        }
        let gb = residual.sum() / s;
        gw.gemv_tr(1.0 / s, &x, &residual, 0.0);
        gw.axpy(l2, &w, 1.0);
        let gnorm2 = gw.norm_squared() + gb * gb;
        if iterations >= params.max_iter || gnorm2.sqrt() < params.tol {
            break;
        }
        iterations += 1;
        dz.gemv(1.0, &x, &gw, 0.0);
        // try a longer step only when the last one was accepted outright
        if grow {
            step *= 2.0;
        }
        let mut first_try = true;
        let accepted = loop {
            w_try.copy_from(&w);
            w_try.axpy(-step, &gw, 1.0);
            z_try.copy_from(&z);
            z_try.axpy(-step, &dz, 1.0);
            let b_try = b - gb * step;
            let trial = nll_with_exp(z_try.as_slice(), &yf, b_try, ez_try.as_mut_slice()) / s
                + 0.5 * l2 * w_try.norm_squared();
            if trial <= loss - 0.5 * step * gnorm2 {
                break Some((b_try, trial));
            }
            first_try = false;
            step *= 0.5;
            if step < 1e-16 {
                break None;
            }
        };
        let Some((b_new, loss_new)) = accepted else {
            break;
        };
        grow = first_try;
        std::mem::swap(&mut w, &mut w_try);
        std::mem::swap(&mut z, &mut z_try);
        std::mem::swap(&mut ez, &mut ez_try);
        b = b_new;
        loss = loss_new;
    }
    Ok(LogisticModel {
        weights: w.iter().copied().collect(),
        bias: b,
        iterations,
        final_loss: loss,
    })
}

impl LogisticModel {
    pub fn decision(&self, row: impl IntoIterator<Item = f64>) -> f64 {
        self.bias
            + row
                .into_iter()
                .zip(&self.weights)
                .map(|(x, w)| x * w)
                .sum::<f64>()
    }

    /// Class predictions at probability threshold 0.5.
    pub fn predict(&self, x: &DMatrixView<'_, f64>) -> Vec<u8> {
        let w = DVector::from_column_slice(&self.weights);
        let z = x * w;
        z.iter()
            .map(|&zi| u8::from(zi + self.bias >= 0.0))
            .collect()
    }

    pub fn accuracy(&self, x: &DMatrixView<'_, f64>, y: &[u8]) -> f64 {
        if y.is_empty() {
            return 0.0;
        }
        let correct = self
            .predict(x)
            .iter()
            .zip(y)
            .filter(|(p, t)| p == t)
            .count();
        correct as f64 / y.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_one_dimensional() {
        let x = DMatrix::from_column_slice(4, 1, &[-2.0, -1.0, 1.0, 2.0]);
        let y = [0, 0, 1, 1];
        let m = train_logistic(x.as_view(), &y, &LogisticParams::default()).unwrap();
        assert_eq!(m.accuracy(&x.as_view(), &y), 1.0);
        assert!(m.weights[0] > 0.0);
    }

    #[test]
    fn gradient_at_zero() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, -3.0]);
        let y = [1.0, 0.0, 1.0];
        let w = DVector::zeros(2);
        let (_, gw, gb) = loss_and_gradient(&x.as_view(), &y, &w, 0.0, 0.3);
        // X^T (0.5 - y) / S
        let r = [-0.5, 0.5, -0.5];
        for j in 0..2 {
            let expect: f64 = (0..3).map(|i| x[(i, j)] * r[i]).sum::<f64>() / 3.0;
            assert!((gw[j] - expect).abs() < 1e-15);
        }
        assert!((gb - (-0.5 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(12, 3, |_, _| rng.random_range(-2.0..2.0));
        let y: Vec<f64> = (0..12).map(|i| f64::from(i % 3 == 0)).collect();
        let w = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let b = 0.2;
        let (_, gw, gb) = loss_and_gradient(&x.as_view(), &y, &w, b, 0.01);
        let h = 1e-6;
        for j in 0..3 {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let fd = (loss_at(&x.as_view(), &y, &wp, b, 0.01)
                - loss_at(&x.as_view(), &y, &wm, b, 0.01))
                / (2.0 * h);
            assert!((fd - gw[j]).abs() <= 1e-5 * gw[j].abs().max(1e-3));
        }
        let fd = (loss_at(&x.as_view(), &y, &w, b + h, 0.01)
            - loss_at(&x.as_view(), &y, &w, b - h, 0.01))
            / (2.0 * h);
        assert!((fd - gb).abs() <= 1e-5 * gb.abs().max(1e-3));
    }

    #[test]
    fn loss_decreases_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(50, 4, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<u8> = (0..50)
            .map(|i| u8::from(x[(i, 0)] + 0.3 * x[(i, 2)] > 0.1))
            .collect();
        let p = LogisticParams::default();
        let a = train_logistic(x.as_view(), &y, &p).unwrap();
        let b = train_logistic(x.as_view(), &y, &p).unwrap();
        assert_eq!(a, b);
        assert!(a.final_loss < std::f64::consts::LN_2);
    }

    #[test]
    fn one_class_rejected() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!(train_logistic(x.as_view(), &[1, 1, 1], &LogisticParams::default()).is_err());
    }
}
