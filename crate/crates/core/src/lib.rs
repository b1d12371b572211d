//! Recommend one of four filter feature-selection methods (Gini index,
//! ReliefF, MIFS, infinite FS) for a tabular binary-classification dataset.
//!
//! The recommender is trained on a repository of synthetic datasets: each
//! one is summarized by six meta-features and labelled with the method whose
//! ranking gives the best weighted elimination-curve accuracy. A
//! fuzzy-similarity classifier then maps unseen meta-features to a method.

pub mod data;
pub mod error;
pub mod evaluator;
pub mod fuzzy;
pub mod meta;
pub mod pipeline;
pub mod rankers;
pub(crate) mod stats;
pub mod synth;

pub use data::{load_csv, Dataset, LabelColumn, NormStats};
pub use error::{Error, Result};
pub use evaluator::{best_method, elimination_curve, weighted_sum, EvalSettings};
pub use fuzzy::{recommend, similarity, train_recommender, MetaDataset, RecommenderModel};
pub use meta::{extract_meta, MetaFeatureVector};
pub use rankers::{FeatureRanking, Method, RankerParams};
pub use synth::{synthesize, SynthManifest, SynthParams};
