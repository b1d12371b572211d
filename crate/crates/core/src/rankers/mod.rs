//! The four filter feature-selection methods. Each produces a full ranking
//! of the features, most significant first.

mod gini;
pub mod histogram;
mod infinite;
mod mifs;
mod relieff;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use gini::{gini_impurity, rank_gini};
pub use histogram::{discretize, entropy, mutual_information, Histogram2D};
pub use infinite::{infinite_scores_from_adjacency, rank_infinite};
pub use mifs::rank_mifs;
pub use relieff::rank_relieff;

/// Candidate feature-selection method. The declaration order is the fixed
/// tie-break order used everywhere a single method must be chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "GIFS")]
    Gifs,
    #[serde(rename = "ReliefF")]
    ReliefF,
    #[serde(rename = "MIFS")]
    Mifs,
    #[serde(rename = "IFS")]
    Ifs,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gifs, Method::ReliefF, Method::Mifs, Method::Ifs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gifs => "GIFS",
            Method::ReliefF => "ReliefF",
            Method::Mifs => "MIFS",
            Method::Ifs => "IFS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gifs" | "gini" => Ok(Method::Gifs),
            "relieff" => Ok(Method::ReliefF),
            "mifs" => Ok(Method::Mifs),
            "ifs" | "infinite" => Ok(Method::Ifs),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

/// Hyperparameters for all four rankers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerParams {
    /// ReliefF neighbour count.
    pub k_neighbors: usize,
    /// ReliefF iterations; `None` visits every sample once.
    pub iterations: Option<usize>,
    /// MIFS redundancy penalty.
    pub beta: f64,
    /// Equal-width bin count for MI estimates.
    pub bins: usize,
    /// IFS mixing weight between spread and decorrelation.
    pub alpha: f64,
    /// IFS path-decay as a fraction of the inverse spectral radius.
    pub r_factor: f64,
}

impl Default for RankerParams {
    fn default() -> Self {
        RankerParams {
            k_neighbors: 10,
            iterations: None,
            beta: 0.5,
            bins: 10,
            alpha: 0.5,
            r_factor: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// Feature indices, most significant first.
    pub order: Vec<usize>,
    /// Score per original feature index.
    pub scores: Vec<f64>,
    pub method: Method,
}

impl FeatureRanking {
    /// Rank by descending score, ties to the lower index.
    pub fn from_scores(scores: Vec<f64>, method: Method) -> Self {
        let order = order_by_score_desc(&scores);
        FeatureRanking {
            order,
            scores,
            method,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub(crate) fn order_by_score_desc(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Anything that can rank the features of a training split.
pub trait FeatureRanker: Sync {
    fn rank(&self, train: &Dataset) -> Result<FeatureRanking>;
}

/// A method bundled with its hyperparameters.
#[derive(Debug, Clone)]
pub struct MethodRanker<'a> {
    pub method: Method,
    pub params: &'a RankerParams,
}

impl FeatureRanker for MethodRanker<'_> {
    fn rank(&self, train: &Dataset) -> Result<FeatureRanking> {
        rank(self.method, train, self.params)
    }
}

/// Ranks every split with the same precomputed order.
#[derive(Debug, Clone)]
pub struct FixedRanking {
    pub order: Vec<usize>,
    pub method: Method,
}

impl FeatureRanker for FixedRanking {
    fn rank(&self, train: &Dataset) -> Result<FeatureRanking> {
        let n = train.n_features();
        if self.order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.order.len(),
            });
        }
        let mut scores = vec![0.0; n];
        for (pos, &j) in self.order.iter().enumerate() {
            scores[j] = (n - pos) as f64;
        }
        Ok(FeatureRanking {
            order: self.order.clone(),
            scores,
            method: self.method,
        })
    }
}

pub fn rank(method: Method, train: &Dataset, params: &RankerParams) -> Result<FeatureRanking> {
    match method {
        Method::Gifs => rank_gini(train),
        Method::ReliefF => rank_relieff(train, params.k_neighbors, params.iterations),
        Method::Mifs => rank_mifs(train, params.beta, params.bins),
        Method::Ifs => rank_infinite(train, params.alpha, params.r_factor),
    }
}
