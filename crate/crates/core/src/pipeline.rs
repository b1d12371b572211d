//! End-to-end orchestration: build the synthetic repository and its
//! meta-dataset, train the recommender, and evaluate it on user datasets.
//!
//! Layout under the output directory:
//!
//! ```text
//! repository/ds_<i>.csv, ds_<i>.manifest.json   generated datasets
//! work/ds_<i>.json                              per-dataset result (resume)
//! meta.csv                                      ns,nf,aaf,acf,acvf,aef,label
//! provenance.json                               meta row -> dataset mapping
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::evaluator::{
    evaluate_methods, EliminationCurve, EvalSettings, MethodScore, MethodScoreTable,
};
use crate::fuzzy::{MetaDataset, MetaRow, Recommendation, RecommenderModel};
use crate::meta::{extract_meta, MetaFeatureVector};
use crate::rankers::Method;
use crate::synth::{dataset_file_stem, dataset_seed, repository_entry, save_entry, ParamRanges};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Number of synthetic datasets in the training repository.
    pub count: usize,
    pub master_seed: u64,
    pub eval: EvalSettings,
    pub ranges: ParamRanges,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses all available cores.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            count: 1000,
            master_seed: 1,
            eval: EvalSettings::default(),
            ranges: ParamRanges::default(),
            out_dir: PathBuf::from("fsmeta-out"),
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(
                "repository count must be positive".into(),
            ));
        }
        if self.eval.folds < 2 {
            return Err(Error::InvalidParameter(
                "fold count must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn repository_dir(&self) -> PathBuf {
        self.out_dir.join("repository")
    }

    pub fn work_dir(&self) -> PathBuf {
        self.out_dir.join("work")
    }

    pub fn meta_csv_path(&self) -> PathBuf {
        self.out_dir.join("meta.csv")
    }

    pub fn provenance_path(&self) -> PathBuf {
        self.out_dir.join("provenance.json")
    }

    /// Run `f` on a pool sized by `jobs`.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// Outcome for one repository dataset, persisted so a rerun can resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub index: usize,
    pub source: String,
    pub meta: Option<MetaFeatureVector>,
    pub table: Option<MethodScoreTable>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRow {
    pub row: usize,
    pub source: String,
    pub csv: String,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub count: usize,
    pub rows: Vec<ProvenanceRow>,
    pub skipped: Vec<Skipped>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaBuild {
    pub meta: MetaDataset,
    pub records: Vec<DatasetRecord>,
    pub provenance: Provenance,
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn load_record(path: &Path, index: usize) -> Option<DatasetRecord> {
    let text = fs::read_to_string(path).ok()?;
    match serde_json::from_str::<DatasetRecord>(&text) {
        Ok(r) if r.index == index => Some(r),
        _ => {
            warn!("ignoring unreadable work record {}", path.display());
            None
        }
    }
}

/// Generate, persist and label repository dataset `index`.
fn process_index(config: &RunConfig, index: usize) -> Result<DatasetRecord> {
    let source = dataset_file_stem(index);
    let record_path = config.work_dir().join(format!("{source}.json"));
    if let Some(done) = load_record(&record_path, index) {
        return Ok(done);
    }

    let compute = || -> Result<(MetaFeatureVector, MethodScoreTable)> {
        let (data, manifest) = repository_entry(config.master_seed, index, &config.ranges)?;
        save_entry(&config.repository_dir(), index, &data, &manifest)?;
        let meta = extract_meta(&data);
        let mut eval = config.eval.clone();
        eval.seed = dataset_seed(config.master_seed, index);
        let table = evaluate_methods(&data, &eval)?.table;
        Ok((meta, table))
    };
    let record = match compute() {
        Ok((meta, table)) => DatasetRecord {
            index,
            source,
            meta: Some(meta),
            table: Some(table),
            error: None,
        },
        Err(e) if e.is_io() => return Err(e.for_dataset(index)),
        Err(e) => {
            warn!("skipping dataset {index}: {e}");
            DatasetRecord {
                index,
                source,
                meta: None,
                table: None,
                error: Some(e.to_string()),
            }
        }
    };
    write_atomic(
        &record_path,
        serde_json::to_string_pretty(&record)?.as_bytes(),
    )?;
    Ok(record)
}

/// Build (or resume building) the training repository and its meta-dataset.
pub fn build_meta_dataset(config: &RunConfig) -> Result<MetaBuild> {
    config.validate()?;
    for dir in [
        config.out_dir.clone(),
        config.repository_dir(),
        config.work_dir(),
    ] {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    info!(
        "building meta-dataset from {} datasets (seed {})",
        config.count, config.master_seed
    );
    let records: Vec<DatasetRecord> = config.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|i| process_index(config, i))
            .collect::<Result<_>>()
    })??;

    let mut meta = MetaDataset::default();
    let mut provenance = Provenance {
        master_seed: config.master_seed,
        count: config.count,
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for r in &records {
        match (&r.meta, &r.table) {
            (Some(m), Some(t)) => {
                provenance.rows.push(ProvenanceRow {
                    row: meta.len(),
                    source: r.source.clone(),
                    csv: format!("repository/{}.csv", r.source),
                    manifest: format!("repository/{}.manifest.json", r.source),
                });
                meta.rows.push(MetaRow {
                    meta: *m,
                    label: t.best_method,
                    source: r.source.clone(),
                });
            }
            _ => provenance.skipped.push(Skipped {
                index: r.index,
                error: r.error.clone().unwrap_or_default(),
            }),
        }
    }
    meta.save_csv(config.meta_csv_path())?;
    write_atomic(
        &config.provenance_path(),
        (serde_json::to_string_pretty(&provenance)? + "\n").as_bytes(),
    )?;
    Ok(MetaBuild {
        meta,
        records,
        provenance,
    })
}

/// Source of a method recommendation for a dataset's meta-features.
pub trait MethodRecommender: Sync {
    fn recommend(&self, meta: &MetaFeatureVector) -> Result<Recommendation>;
}

impl MethodRecommender for RecommenderModel {
    fn recommend(&self, meta: &MetaFeatureVector) -> Result<Recommendation> {
        RecommenderModel::recommend(self, meta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub meta: MetaFeatureVector,
    pub ws: Vec<MethodScore>,
    pub best_method: Method,
    pub recommended: Method,
    pub hit: bool,
    pub similarities: Vec<(Method, f64)>,
    #[serde(skip)]
    pub curves: Vec<(Method, EliminationCurve)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFailure {
    pub dataset: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    /// Datasets on which each method attained the best WS (ties count for
    /// every tied method).
    pub best_counts: BTreeMap<Method, usize>,
    pub recommender_hits: usize,
    pub evaluated: usize,
    /// Hits over successfully evaluated datasets.
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<ReportFailure>,
    pub summary: ReportSummary,
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn evaluate_one(
    recommender: &dyn MethodRecommender,
    name: String,
    data: &Dataset,
    settings: &EvalSettings,
) -> Result<ReportRow> {
    let meta = extract_meta(data);
    let rec = recommender.recommend(&meta)?;
    let eval = evaluate_methods(data, settings)?;
    let best = eval.table.best_method;
    Ok(ReportRow {
        dataset: name,
        meta,
        ws: eval.table.scores,
        best_method: best,
        recommended: rec.method,
        hit: rec.method == best,
        similarities: rec.similarities,
        curves: eval.curves,
    })
}

/// Evaluate the recommender on in-memory datasets. Failures are recorded
/// per dataset and do not abort the suite.
pub fn evaluate_datasets(
    recommender: &dyn MethodRecommender,
    datasets: &[(String, Dataset)],
    settings: &EvalSettings,
) -> EvaluationReport {
    let results: Vec<(String, Result<ReportRow>)> = datasets
        .iter()
        .map(|(name, data)| {
            (
                name.clone(),
                evaluate_one(recommender, name.clone(), data, settings),
            )
        })
        .collect();
    assemble_report(results)
}

/// Evaluate the recommender on CSV files.
pub fn evaluate_suite(
    recommender: &dyn MethodRecommender,
    paths: &[PathBuf],
    label_column: &LabelColumn,
    settings: &EvalSettings,
) -> EvaluationReport {
    let results = paths
        .iter()
        .map(|p| {
            let name = dataset_name(p);
            let row = load_csv(p, label_column)
                .and_then(|d| evaluate_one(recommender, name.clone(), &d, settings));
            (name, row)
        })
        .collect();
    assemble_report(results)
}

fn assemble_report(results: Vec<(String, Result<ReportRow>)>) -> EvaluationReport {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                warn!("evaluation of {name} failed: {e}");
                failures.push(ReportFailure {
                    dataset: name,
                    error: e.to_string(),
                });
            }
        }
    }
    let mut best_counts: BTreeMap<Method, usize> = Method::ALL.iter().map(|&m| (m, 0)).collect();
    for row in &rows {
        let max = row
            .ws
            .iter()
            .map(|s| s.ws)
            .fold(f64::NEG_INFINITY, f64::max);
        for s in row.ws.iter().filter(|s| s.ws == max) {
            *best_counts.entry(s.method).or_insert(0) += 1;
        }
    }
    let hits = rows.iter().filter(|r| r.hit).count();
    let evaluated = rows.len();
    let summary = ReportSummary {
        best_counts,
        recommender_hits: hits,
        evaluated,
        success_rate: if evaluated == 0 {
            0.0
        } else {
            hits as f64 / evaluated as f64
        },
    };
    EvaluationReport {
        rows,
        failures,
        summary,
    }
}

impl EvaluationReport {
    /// One row per dataset: WS per method, best, recommended, hit.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("dataset");
        for m in Method::ALL {
            out.push(',');
            out.push_str(m.name());
        }
        out.push_str(",best_method,recommended,hit\n");
        for row in &self.rows {
            out.push_str(&row.dataset);
            for m in Method::ALL {
                let ws = row.ws.iter().find(|s| s.method == m).map(|s| s.ws);
                out.push(',');
                if let Some(ws) = ws {
                    out.push_str(&ws.to_string());
                }
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                row.best_method, row.recommended, row.hit
            ));
        }
        out
    }

    pub fn save(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let json = out_dir.join("report.json");
        fs::write(&json, serde_json::to_string_pretty(self)? + "\n")
            .map_err(|e| Error::io(&json, e))?;
        let csv = out_dir.join("report.csv");
        fs::write(&csv, self.to_csv_string()).map_err(|e| Error::io(&csv, e))?;
        for row in &self.rows {
            write_curves(&row.curves, &out_dir.join(&row.dataset))?;
        }
        Ok(())
    }
}

pub fn curve_file_name(method: Method) -> String {
    format!("curve_{}.csv", method.name())
}

/// Write one `removed_count,mean_accuracy` CSV per method.
pub fn write_curves(curves: &[(Method, EliminationCurve)], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    curves
        .iter()
        .map(|(m, c)| {
            let path = out_dir.join(curve_file_name(*m));
            c.save_csv(&path)?;
            Ok(path)
        })
        .collect()
}

/// Compute every method's elimination curve on `data` and write them.
pub fn report_curves(
    data: &Dataset,
    settings: &EvalSettings,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let eval = evaluate_methods(data, settings)?;
    write_curves(&eval.curves, out_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, ws: [f64; 4], rec: Method) -> ReportRow {
        let ws: Vec<MethodScore> = Method::ALL
            .iter()
            .zip(ws)
            .map(|(&method, ws)| MethodScore { method, ws })
            .collect();
        let best = MethodScoreTable::from_scores(ws.clone())
            .unwrap()
            .best_method;
        ReportRow {
            dataset: name.into(),
            meta: MetaFeatureVector::from_array([10.0, 2.0, 0.0, 0.0, 0.0, 0.0]),
            ws,
            best_method: best,
            recommended: rec,
            hit: best == rec,
            similarities: vec![],
            curves: vec![],
        }
    }

    #[test]
    fn summary_counts_ties_for_every_method() {
        let report = assemble_report(vec![
            (
                "a".into(),
                Ok(row("a", [2.41, 2.40, 2.41, 2.40], Method::Mifs)),
            ),
            (
                "b".into(),
                Ok(row("b", [8.52, 8.29, 8.49, 8.42], Method::ReliefF)),
            ),
            ("c".into(), Err(Error::DegenerateLabels)),
        ]);
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.summary.best_counts[&Method::Gifs], 2);
        assert_eq!(report.summary.best_counts[&Method::Mifs], 1);
        assert_eq!(report.summary.best_counts[&Method::Ifs], 0);
        // tie between GIFS and MIFS resolves to GIFS, so MIFS is a miss
        assert_eq!(report.summary.recommender_hits, 0);
        assert_eq!(report.summary.success_rate, 0.0);
        let csv = report.to_csv_string();
        assert!(csv.starts_with("dataset,GIFS,ReliefF,MIFS,IFS,best_method,recommended,hit\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.count = 0;
        assert!(c.validate().is_err());
    }
}
