//! Scoring feature rankings through cross-validated elimination curves and
//! their weighted sum.
//!
//! For each fold the ranking and standardization are fitted on the training
//! split only. Features are then removed from the least significant end one
//! at a time, and a logistic regression trained on the survivors is scored
//! on the test split.

mod logistic;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{fit_zscore, stratified_kfold, Dataset, FoldSplit};
use crate::error::{Error, Result};
use crate::rankers::{FeatureRanker, Method, MethodRanker, RankerParams};

pub use logistic::{loss_and_gradient, train_logistic, LogisticModel, LogisticParams};

/// Everything needed to evaluate rankers on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub folds: usize,
    pub seed: u64,
    pub ranker: RankerParams,
    pub logistic: LogisticParams,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            folds: 10,
            seed: 0,
            ranker: RankerParams::default(),
            logistic: LogisticParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationCurve {
    /// Entry `k - 1` is the mean accuracy after removing the `k` least
    /// significant features, `k = 1..N-1`.
    pub mean_accuracy: Vec<f64>,
    pub n_features: usize,
}

impl EliminationCurve {
    pub fn new(mean_accuracy: Vec<f64>, n_features: usize) -> Result<Self> {
        if mean_accuracy.len() + 1 != n_features.max(1) {
            return Err(Error::DimensionMismatch {
                expected: n_features.saturating_sub(1),
                found: mean_accuracy.len(),
            });
        }
        if let Some(a) = mean_accuracy.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::OutOfRange(format!("accuracy {a} outside [0, 1]")));
        }
        Ok(EliminationCurve {
            mean_accuracy,
            n_features,
        })
    }

    /// `(removed_count, mean_accuracy)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mean_accuracy
            .iter()
            .enumerate()
            .map(|(i, &a)| (i + 1, a))
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "removed_count,mean_accuracy")?;
        for (k, a) in self.points() {
            writeln!(out, "{k},{a}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Accuracy per removed-feature count on one fold.
fn fold_accuracies(
    data: &Dataset,
    ranker: &dyn FeatureRanker,
    fold: &FoldSplit,
    logistic: &LogisticParams,
) -> Result<Vec<f64>> {
    let n = data.n_features();
    let train = data.select_rows(&fold.train_indices)?;
    let ranking = ranker.rank(&train)?;
    if ranking.order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: ranking.order.len(),
        });
    }
    let stats = fit_zscore(data, &fold.train_indices)?;
    let z = stats.apply_zscore(data.values())?;
    let x_train = z
        .select_rows(&fold.train_indices)
        .select_columns(&ranking.order);
    let x_test = z
        .select_rows(&fold.test_indices)
        .select_columns(&ranking.order);
    let y_train = train.labels();
    let y_test: Vec<u8> = fold
        .test_indices
        .iter()
        .map(|&i| data.labels()[i])
        .collect();

    (1..n)
        .map(|removed| {
            let keep = n - removed;
            let model = train_logistic(x_train.columns(0, keep), y_train, logistic)?;
            Ok(model.accuracy(&x_test.columns(0, keep), &y_test))
        })
        .collect()
}

/// Elimination curve of an arbitrary ranker over precomputed folds.
pub fn elimination_curve_with(
    data: &Dataset,
    ranker: &dyn FeatureRanker,
    folds: &[FoldSplit],
    logistic: &LogisticParams,
) -> Result<EliminationCurve> {
    if folds.is_empty() {
        return Err(Error::Empty("no folds"));
    }
    let per_fold: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|fold| fold_accuracies(data, ranker, fold, logistic))
        .collect::<Result<_>>()?;
    let n = data.n_features();
    let mut mean = vec![0.0; n.saturating_sub(1)];
    for accs in &per_fold {
        for (m, a) in mean.iter_mut().zip(accs) {
            *m += a;
        }
    }
    let folds_f = per_fold.len() as f64;
    for m in &mut mean {
        *m /= folds_f;
    }
    EliminationCurve::new(mean, n)
}

pub fn elimination_curve(
    data: &Dataset,
    method: Method,
    settings: &EvalSettings,
) -> Result<EliminationCurve> {
    let folds = stratified_kfold(data, settings.folds, settings.seed)?;
    let ranker = MethodRanker {
        method,
        params: &settings.ranker,
    };
    elimination_curve_with(data, &ranker, &folds, &settings.logistic)
}

/// `Σ_k acc_k · k / N` over removed counts `k = 1..N-1`.
pub fn weighted_sum(curve: &EliminationCurve) -> f64 {
    let n = curve.n_features as f64;
    curve.points().map(|(k, a)| a * k as f64 / n).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: Method,
    pub ws: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScoreTable {
    /// One entry per method, in fixed method order.
    pub scores: Vec<MethodScore>,
    pub best_method: Method,
}

impl MethodScoreTable {
    /// Pick the highest WS; exact ties go to the earlier method.
    pub fn from_scores(scores: Vec<MethodScore>) -> Result<Self> {
        let mut sorted = scores;
        sorted.sort_by_key(|s| s.method);
        let best = sorted
            .iter()
            .fold(None::<&MethodScore>, |best, s| match best {
                Some(b) if b.ws >= s.ws => Some(b),
                _ => Some(s),
            })
            .ok_or(Error::Empty("no method scores"))?
            .method;
        Ok(MethodScoreTable {
            scores: sorted,
            best_method: best,
        })
    }

    pub fn ws(&self, method: Method) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.method == method)
            .map(|s| s.ws)
    }

    /// Every method attaining the maximum WS.
    pub fn best_methods(&self) -> Vec<Method> {
        let max = self
            .scores
            .iter()
            .map(|s| s.ws)
            .fold(f64::NEG_INFINITY, f64::max);
        self.scores
            .iter()
            .filter(|s| s.ws == max)
            .map(|s| s.method)
            .collect()
    }
}

/// Scores plus the underlying curves for all four methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEvaluation {
    pub table: MethodScoreTable,
    pub curves: Vec<(Method, EliminationCurve)>,
}

/// Run every method over the same folds.
pub fn evaluate_methods(data: &Dataset, settings: &EvalSettings) -> Result<MethodEvaluation> {
    let folds = stratified_kfold(data, settings.folds, settings.seed)?;
    let curves: Vec<(Method, EliminationCurve)> = Method::ALL
        .par_iter()
        .map(|&method| {
            let ranker = MethodRanker {
                method,
                params: &settings.ranker,
            };
            elimination_curve_with(data, &ranker, &folds, &settings.logistic).map(|c| (method, c))
        })
        .collect::<Result<_>>()?;
    let scores = curves
        .iter()
        .map(|(method, c)| MethodScore {
            method: *method,
            ws: weighted_sum(c),
        })
        .collect();
    Ok(MethodEvaluation {
        table: MethodScoreTable::from_scores(scores)?,
        curves,
    })
}

pub fn best_method(data: &Dataset, settings: &EvalSettings) -> Result<MethodScoreTable> {
    evaluate_methods(data, settings).map(|e| e.table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ws_hand_values() {
        let all_one = EliminationCurve::new(vec![1.0; 6], 7).unwrap();
        assert!((weighted_sum(&all_one) - 3.0).abs() < 1e-12);
        let zeros = EliminationCurve::new(vec![0.0; 6], 7).unwrap();
        assert_eq!(weighted_sum(&zeros), 0.0);
        let c = EliminationCurve::new(vec![0.8, 0.9, 1.0], 4).unwrap();
        assert!((weighted_sum(&c) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn curve_validation() {
        assert!(EliminationCurve::new(vec![0.5; 3], 3).is_err());
        assert!(EliminationCurve::new(vec![1.5], 2).is_err());
        assert!(EliminationCurve::new(vec![], 1).is_ok());
    }

    #[test]
    fn tie_goes_to_earlier_method() {
        let t = MethodScoreTable::from_scores(vec![
            MethodScore {
                method: Method::Ifs,
                ws: 2.0,
            },
            MethodScore {
                method: Method::Mifs,
                ws: 2.0,
            },
            MethodScore {
                method: Method::ReliefF,
                ws: 1.0,
            },
            MethodScore {
                method: Method::Gifs,
                ws: 1.5,
            },
        ])
        .unwrap();
        assert_eq!(t.best_method, Method::Mifs);
        assert_eq!(t.best_methods(), vec![Method::Mifs, Method::Ifs]);
        assert_eq!(t.scores[0].method, Method::Gifs);
    }

    proptest! {
        #[test]
        fn ws_bounded_and_monotone(
            accs in prop::collection::vec(0.0f64..=1.0, 1..30),
            bump in 0usize..30,
            delta in 0.0f64..=1.0,
        ) {
            let n = accs.len() + 1;
            let c = EliminationCurve::new(accs.clone(), n).unwrap();
            let ws = weighted_sum(&c);
            prop_assert!(ws >= 0.0);
            prop_assert!(ws <= (n as f64 - 1.0) / 2.0 + 1e-12);

            let mut raised = accs;
            let i = bump % raised.len();
            raised[i] = (raised[i] + delta).min(1.0);
            let higher = weighted_sum(&EliminationCurve::new(raised, n).unwrap());
            prop_assert!(higher >= ws);
        }
    }
}
