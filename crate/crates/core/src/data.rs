//! Dataset representation, CSV ingestion, normalization and fold splitting.
//!
//! A [`Dataset`] is an `S × N` real matrix (stored column-major, so each
//! feature column is a contiguous slice) with a binary label per row.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower clamp applied to unit-interval normalized values.
pub const UNIT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    labels: Vec<u8>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>, labels: Vec<u8>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidParameter(format!(
                "dataset needs at least 2 samples, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(Error::InvalidParameter(
                "dataset needs at least 1 feature".into(),
            ));
        }
        if values.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: values.nrows(),
                found: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::OutOfRange(format!("label {bad} is not 0 or 1")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::NonFinite(format!("row {row}, column {col}")));
        }
        Ok(Dataset {
            values,
            labels,
            feature_names: None,
        })
    }

    /// Build from row-major nested vectors. Mostly useful in tests.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        let values = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        Dataset::new(values, labels)
    }

    /// Build from feature columns.
    pub fn from_columns(columns: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let s = labels.len();
        if let Some(c) = columns.iter().find(|c| c.len() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: c.len(),
            });
        }
        let flat: Vec<f64> = columns.iter().flatten().copied().collect();
        Dataset::new(DMatrix::from_vec(s, columns.len(), flat), labels)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Contiguous view of feature column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        let s = self.n_samples();
        &self.values.as_slice()[j * s..(j + 1) * s]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Number of samples in class 0 and class 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn has_both_classes(&self) -> bool {
        let [a, b] = self.class_counts();
        a > 0 && b > 0
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.has_both_classes() {
            Ok(())
        } else {
            Err(Error::DegenerateLabels)
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let values = self.values.select_rows(rows);
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        let mut out = Dataset::new(values, labels)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Dataset> {
        let values = self.values.select_columns(cols);
        let mut out = Dataset::new(values, self.labels.clone())?;
        out.feature_names = self
            .feature_names
            .as_ref()
            .map(|names| cols.iter().map(|&j| names[j].clone()).collect());
        Ok(out)
    }

    /// Replace the label vector, keeping values and names.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Dataset> {
        let mut out = Dataset::new(self.values.clone(), labels)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Write as CSV with a header row and the label in the last column.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_csv(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let n = self.n_features();
        let header: Vec<String> = match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..n).map(|j| format!("f{j}")).collect(),
        };
        writeln!(out, "{},label", header.join(","))?;
        for i in 0..self.n_samples() {
            for j in 0..n {
                write!(out, "{},", self.values[(i, j)])?;
            }
            writeln!(out, "{}", self.labels[i])?;
        }
        Ok(())
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

/// Parse CSV text. A first row whose feature cells do not all parse as
/// numbers is treated as a header. The two distinct label strings are mapped
/// to 0 and 1 in ascending textual order.
pub fn read_csv<R: Read>(reader: R, label_column: &LabelColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    let Some(first) = records.first() else {
        return Err(Error::Empty("csv file has no rows"));
    };
    let width = first.len();
    if width < 2 {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "need at least one feature column and a label column".into(),
        });
    }

    let label_idx = |header: Option<&csv::StringRecord>| -> Result<usize> {
        match label_column {
            LabelColumn::Last => Ok(width - 1),
            LabelColumn::Index(i) if *i < width => Ok(*i),
            LabelColumn::Index(i) => Err(Error::InvalidParameter(format!(
                "label column {i} out of range for {width} columns"
            ))),
            LabelColumn::Name(name) => header
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::InvalidParameter(format!("no column named {name:?}"))),
        }
    };

    // Header detection needs a label index; with a named label the first row
    // must be the header.
    let provisional = match label_column {
        LabelColumn::Name(_) => None,
        _ => Some(label_idx(None)?),
    };
    let has_header = match provisional {
        None => true,
        Some(li) => first
            .iter()
            .enumerate()
            .any(|(j, c)| j != li && c.parse::<f64>().is_err()),
    };
    let label = if has_header {
        label_idx(Some(first))?
    } else {
        provisional.expect("set for non-named label columns")
    };

    let feature_cols: Vec<usize> = (0..width).filter(|&j| j != label).collect();
    let feature_names = has_header.then(|| {
        feature_cols
            .iter()
            .map(|&j| first[j].to_string())
            .collect::<Vec<_>>()
    });
    let body = if has_header {
        &records[1..]
    } else {
        &records[..]
    };
    if body.is_empty() {
        return Err(Error::Empty("csv file has no data rows"));
    }

    let row_offset = usize::from(has_header);
    let mut columns = vec![Vec::with_capacity(body.len()); feature_cols.len()];
    let mut raw_labels = Vec::with_capacity(body.len());
    for (r, rec) in body.iter().enumerate() {
        for (slot, &j) in feature_cols.iter().enumerate() {
            let cell = &rec[j];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: r + row_offset,
                column: j,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: r + row_offset,
                    column: j,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            columns[slot].push(v);
        }
        raw_labels.push(rec[label].to_string());
    }

    let mut distinct: Vec<&str> = raw_labels.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::NonBinaryLabels(distinct.len()));
    }
    let labels = raw_labels
        .iter()
        .map(|l| u8::from(l.as_str() == distinct[1]))
        .collect();

    let data = Dataset::from_columns(&columns, labels)?;
    match feature_names {
        Some(names) => data.with_feature_names(names),
        None => Ok(data),
    }
}

/// Per-feature standardization statistics plus the range of the
/// standardized training values, used for mapping into `[ε, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl NormStats {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn zscore(&self, j: usize, v: f64) -> f64 {
        (v - self.means[j]) / self.stds[j]
    }

    /// Z-score, rescale so the training range maps to `[0, 1]`, then clamp to
    /// `[UNIT_EPSILON, 1]`. A feature whose standardized training values are
    /// all equal maps to 1.
    pub fn unit(&self, j: usize, v: f64) -> f64 {
        let z = self.zscore(j, v);
        let range = self.maxs[j] - self.mins[j];
        let u = if range > 0.0 {
            (z - self.mins[j]) / range
        } else {
            1.0
        };
        u.clamp(UNIT_EPSILON, 1.0)
    }

    pub fn apply_zscore_unit_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.unit(j, v))
            .collect())
    }

    pub fn apply_zscore_unit(&self, values: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_width(values.ncols())?;
        Ok(DMatrix::from_fn(values.nrows(), values.ncols(), |i, j| {
            self.unit(j, values[(i, j)])
        }))
    }

    /// Z-score only (no unit rescale).
    pub fn apply_zscore(&self, values: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_width(values.ncols())?;
        Ok(DMatrix::from_fn(values.nrows(), values.ncols(), |i, j| {
            self.zscore(j, values[(i, j)])
        }))
    }

    fn check_width(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// Fit standardization statistics on the given rows of a matrix. Uses the
/// sample standard deviation; zero-variance features get std 1.
pub fn fit_zscore_matrix(values: &DMatrix<f64>, rows: &[usize]) -> Result<NormStats> {
    if rows.is_empty() {
        return Err(Error::Empty("no rows to fit normalization on"));
    }
    let n = values.ncols();
    let mut stats = NormStats {
        means: Vec::with_capacity(n),
        stds: Vec::with_capacity(n),
        mins: Vec::with_capacity(n),
        maxs: Vec::with_capacity(n),
    };
    for j in 0..n {
        let col: Vec<f64> = rows.iter().map(|&i| values[(i, j)]).collect();
        let mean = crate::stats::mean(&col);
        let sd = crate::stats::sample_std(&col);
        let sd = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                let z = (v - mean) / sd;
                (lo.min(z), hi.max(z))
            });
        stats.means.push(mean);
        stats.stds.push(sd);
        stats.mins.push(lo);
        stats.maxs.push(hi);
    }
    Ok(stats)
}

pub fn fit_zscore(data: &Dataset, rows: &[usize]) -> Result<NormStats> {
    fit_zscore_matrix(data.values(), rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Stratified k-fold split. Each class is shuffled with `seed` and dealt
/// round-robin across folds, continuing the fold counter from one class to
/// the next so fold sizes also stay balanced.
///
/// `k` is capped at the sample count. When the minority class is smaller
/// than `k` some test folds hold no minority sample; every training split
/// still contains both classes since each class has at least two samples.
pub fn stratified_kfold(data: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    stratified_kfold_labels(data.labels(), k, seed)
}

pub fn stratified_kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l)].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "class {c} has {} samples; stratified folds need at least 2",
                members.len()
            )));
        }
    }
    let s = labels.len();
    let k = if k > s {
        warn!("fold count {k} exceeds sample count {s}; using {s} folds");
        s
    } else {
        k
    };
    let minority = by_class[0].len().min(by_class[1].len());
    if minority < k {
        warn!("minority class has {minority} samples, fewer than {k} folds");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; s];
    let mut position = 0usize;
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = position % k;
            position += 1;
        }
    }

    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..s).partition(|&i| fold_of[i] == f);
            FoldSplit {
                train_indices: train,
                test_indices: test,
            }
        })
        .collect())
}
