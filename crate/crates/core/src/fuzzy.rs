//! Fuzzy-similarity classifier over meta-feature vectors.
//!
//! Training standardizes the meta-features, maps them into `[ε, 1]` and
//! summarizes each class by the per-feature geometric mean of its members
//! (the class's ideal vector). A query is assigned to the class whose ideal
//! vector is most similar under a Łukasiewicz-style similarity combined by
//! geometric mean.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{fit_zscore_matrix, NormStats, UNIT_EPSILON};
use crate::error::{Error, Result};
use crate::meta::{MetaFeatureVector, META_FEATURE_NAMES};
use crate::rankers::Method;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRow {
    pub meta: MetaFeatureVector,
    pub label: Method,
    /// Identifier of the source dataset.
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaDataset {
    pub rows: Vec<MetaRow>,
}

impl MetaDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label_counts(&self) -> BTreeMap<Method, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.label).or_insert(0) += 1;
        }
        counts
    }

    /// CSV with header `ns,nf,aaf,acf,acvf,aef,label`.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("{},label\n", META_FEATURE_NAMES.join(","));
        for r in &self.rows {
            let m = &r.meta;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                m.ns, m.nf, m.aaf, m.acf, m.acvf, m.aef, r.label
            ));
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<MetaDataset> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MetaDataset::parse_csv(&text)
    }

    /// Parse a meta CSV. Rows are numbered as sources `row_<i>`.
    pub fn parse_csv(text: &str) -> Result<MetaDataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                row: 0,
                column: 0,
                message: e.to_string(),
            })?
            .clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse {
                    row: 0,
                    column: 0,
                    message: format!("missing column {name:?}"),
                })
        };
        let idx: Vec<usize> = META_FEATURE_NAMES
            .iter()
            .map(|n| column(n))
            .collect::<Result<_>>()?;
        let label_idx = column("label")?;

        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let row = r + 1;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            let mut v = [0.0f64; 6];
            for (slot, &j) in idx.iter().enumerate() {
                v[slot] = rec[j].parse().map_err(|_| Error::Parse {
                    row,
                    column: j,
                    message: format!("cannot parse {:?} as a number", &rec[j]),
                })?;
                if !v[slot].is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: j,
                        message: "non-finite meta-feature".into(),
                    });
                }
            }
            let label: Method = rec[label_idx].parse().map_err(|_| Error::Parse {
                row,
                column: label_idx,
                message: format!("unknown method {:?}", &rec[label_idx]),
            })?;
            rows.push(MetaRow {
                meta: MetaFeatureVector::from_array(v),
                label,
                source: format!("row_{r}"),
            });
        }
        Ok(MetaDataset { rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderModel {
    pub format_version: u32,
    pub norm: NormStats,
    /// Per-class ideal vectors, entries in `[ε, 1]`.
    pub ideal_vectors: BTreeMap<Method, Vec<f64>>,
    /// Tie-break order among the trained classes.
    pub class_order: Vec<Method>,
}

/// `S(y, v) = (Π_p sqrt(1 - |y_p² - v_p²|))^(1/len)`.
pub fn similarity(y: &[f64], v: &[f64]) -> Result<f64> {
    if y.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: v.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty("similarity of empty vectors"));
    }
    if let Some(bad) = y.iter().chain(v).find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::OutOfRange(format!(
            "similarity input {bad} outside [0, 1]"
        )));
    }
    let product: f64 = y
        .iter()
        .zip(v)
        .map(|(a, b)| (1.0 - (a * a - b * b).abs()).sqrt())
        .product();
    Ok(product.powf(1.0 / y.len() as f64))
}

/// Per-column geometric mean of strictly positive rows.
fn geometric_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let width = rows[0].len();
    let z = rows.len() as f64;
    (0..width)
        .map(|p| {
            (rows.iter().map(|r| r[p].ln()).sum::<f64>() / z)
                .exp()
                .clamp(UNIT_EPSILON, 1.0)
        })
        .collect()
}

pub fn train_recommender(meta: &MetaDataset) -> Result<RecommenderModel> {
    if meta.is_empty() {
        return Err(Error::Empty("meta-dataset has no rows"));
    }
    let counts = meta.label_counts();
    if counts.len() < 2 {
        return Err(Error::InvalidParameter(
            "meta-dataset needs at least two distinct labels".into(),
        ));
    }
    let matrix = DMatrix::from_fn(meta.len(), 6, |i, j| meta.rows[i].meta.to_array()[j]);
    let all: Vec<usize> = (0..meta.len()).collect();
    let norm = fit_zscore_matrix(&matrix, &all)?;

    let mut members: BTreeMap<Method, Vec<Vec<f64>>> = BTreeMap::new();
    for row in &meta.rows {
        let unit = norm.apply_zscore_unit_row(&row.meta.to_array())?;
        members.entry(row.label).or_default().push(unit);
    }
    let ideal_vectors = members
        .iter()
        .map(|(&m, rows)| (m, geometric_mean(rows)))
        .collect();
    Ok(RecommenderModel {
        format_version: MODEL_FORMAT_VERSION,
        norm,
        ideal_vectors,
        class_order: counts.keys().copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub method: Method,
    /// Similarity to each trained class, in class order.
    pub similarities: Vec<(Method, f64)>,
}

impl RecommenderModel {
    pub fn classes(&self) -> &[Method] {
        &self.class_order
    }

    /// Standardize and map a raw meta vector into `[ε, 1]`.
    pub fn normalize(&self, raw: &MetaFeatureVector) -> Vec<f64> {
        self.norm
            .apply_zscore_unit_row(&raw.to_array())
            .expect("model normalization has six features")
    }

    pub fn recommend(&self, raw: &MetaFeatureVector) -> Result<Recommendation> {
        self.recommend_normalized(&self.normalize(raw))
    }

    pub fn recommend_normalized(&self, y: &[f64]) -> Result<Recommendation> {
        let mut similarities = Vec::with_capacity(self.class_order.len());
        let mut best: Option<(Method, f64)> = None;
        for &class in &self.class_order {
            let ideal = self.ideal_vectors.get(&class).ok_or_else(|| {
                Error::InvalidParameter(format!("model has no ideal vector for {class}"))
            })?;
            let s = similarity(y, ideal)?;
            similarities.push((class, s));
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((class, s));
            }
        }
        let (method, _) = best.ok_or(Error::Empty("model has no classes"))?;
        Ok(Recommendation {
            method,
            similarities,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        if self.norm.len() != 6 {
            return Err(Error::DimensionMismatch {
                expected: 6,
                found: self.norm.len(),
            });
        }
        for (m, v) in &self.ideal_vectors {
            if v.len() != 6 || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::OutOfRange(format!("ideal vector for {m}")));
            }
        }
        if self
            .class_order
            .iter()
            .any(|m| !self.ideal_vectors.contains_key(m))
        {
            return Err(Error::InvalidParameter(
                "class order names an untrained class".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: RecommenderModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RecommenderModel::from_json(&text)
    }
}

pub fn recommend(model: &RecommenderModel, raw_meta: &MetaFeatureVector) -> Result<Recommendation> {
    model.recommend(raw_meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(v: [f64; 6], label: Method) -> MetaRow {
        MetaRow {
            meta: MetaFeatureVector::from_array(v),
            label,
            source: String::new(),
        }
    }

    #[test]
    fn similarity_hand_values() {
        let y = [0.3, 0.7, 0.1, 0.9, 0.5, 0.2];
        assert!((similarity(&y, &y).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(similarity(&[1.0; 6], &[0.0; 6]).unwrap(), 0.0);
        let s = similarity(&[0.6; 6], &[0.8; 6]).unwrap();
        assert!((s - 0.72f64.sqrt()).abs() < 1e-12);
        assert!((s - 0.84853).abs() < 1e-5);
    }

    #[test]
    fn similarity_contract() {
        assert!(similarity(&[1.2; 6], &[0.5; 6]).is_err());
        assert!(similarity(&[0.5; 6], &[-0.1; 6]).is_err());
        assert!(similarity(&[0.5; 5], &[0.5; 6]).is_err());
    }

    #[test]
    fn geometric_mean_hand_value() {
        let g = geometric_mean(&[vec![0.25; 6], vec![1.0; 6]]);
        for v in g {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn single_member_class_is_its_own_ideal() {
        let meta = MetaDataset {
            rows: vec![
                row([100.0, 10.0, 0.1, 0.2, 0.3, 1.0], Method::Gifs),
                row([200.0, 20.0, 0.4, 0.1, 0.6, 2.0], Method::Mifs),
                row([150.0, 12.0, 0.2, 0.3, 0.5, 1.5], Method::Mifs),
            ],
        };
        let model = train_recommender(&meta).unwrap();
        let own = model.normalize(&meta.rows[0].meta);
        for (a, b) in model.ideal_vectors[&Method::Gifs].iter().zip(&own) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
        assert_eq!(model.classes(), &[Method::Gifs, Method::Mifs]);
        let rec = model.recommend(&meta.rows[0].meta).unwrap();
        assert_eq!(rec.method, Method::Gifs);
        assert!((rec.similarities[0].1 - 1.0).abs() < 1e-12);
        assert!(model
            .ideal_vectors
            .values()
            .flatten()
            .all(|&v| (UNIT_EPSILON..=1.0).contains(&v)));
    }

    #[test]
    fn equal_similarity_goes_to_earlier_class() {
        let norm = NormStats {
            means: vec![0.0; 6],
            stds: vec![1.0; 6],
            mins: vec![0.0; 6],
            maxs: vec![1.0; 6],
        };
        let model = RecommenderModel {
            format_version: MODEL_FORMAT_VERSION,
            norm,
            ideal_vectors: [(Method::ReliefF, vec![0.4; 6]), (Method::Ifs, vec![0.4; 6])]
                .into_iter()
                .collect(),
            class_order: vec![Method::ReliefF, Method::Ifs],
        };
        let rec = model.recommend_normalized(&[0.7; 6]).unwrap();
        assert_eq!(rec.similarities[0].1, rec.similarities[1].1);
        assert_eq!(rec.method, Method::ReliefF);
    }

    #[test]
    fn training_errors() {
        assert!(train_recommender(&MetaDataset::default()).is_err());
        let one = MetaDataset {
            rows: vec![row([1.0; 6], Method::Ifs), row([2.0; 6], Method::Ifs)],
        };
        assert!(train_recommender(&one).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let meta = MetaDataset {
            rows: vec![
                row([100.0, 10.0, 0.1, -0.2, 0.3, 1.0], Method::Gifs),
                row([200.0, 20.0, 0.4, 0.1, -0.6, 2.0], Method::ReliefF),
            ],
        };
        let back = MetaDataset::parse_csv(&meta.to_csv_string()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in meta.rows.iter().zip(&back.rows) {
            assert_eq!(a.meta, b.meta);
            assert_eq!(a.label, b.label);
        }
        assert!(MetaDataset::parse_csv("ns,nf\n1,2\n").is_err());
    }

    proptest! {
        #[test]
        fn similarity_properties(
            y in prop::array::uniform6(0.0f64..=1.0),
            v in prop::array::uniform6(0.0f64..=1.0),
        ) {
            let s = similarity(&y, &v).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, similarity(&v, &y).unwrap());
            prop_assert!((similarity(&y, &y).unwrap() - 1.0).abs() < 1e-15);
        }
    }
}
