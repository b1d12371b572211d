//! `fsmeta`: synthesize datasets, rank and evaluate features, and recommend
//! a feature-selection method from dataset meta-features.
//!
//! Exit status is 0 on success, 1 when an input violates a contract
//! (malformed CSV, bad parameter, single-class labels, ...) and 2 on I/O
//! failures.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use fsmeta_core::data::{load_csv, LabelColumn};
use fsmeta_core::evaluator::{evaluate_methods, EvalSettings};
use fsmeta_core::fuzzy::{train_recommender, MetaDataset, RecommenderModel};
use fsmeta_core::meta::{extract_meta, META_FEATURE_NAMES};
use fsmeta_core::pipeline::{build_meta_dataset, evaluate_suite, write_curves, RunConfig};
use fsmeta_core::rankers::{rank, Method, RankerParams};
use fsmeta_core::synth::{generate_repository, ParamRanges};
use fsmeta_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "fsmeta",
    version,
    about = "Feature-selection method recommendation"
)]
struct Cli {
    /// Master seed (synth, build-repo) or fold-assignment seed (evaluate, report).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Cross-validation folds.
    #[arg(long, global = true, default_value_t = 10)]
    folds: usize,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory, or the model file for `train`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Label column of input CSVs: `last`, a 0-based index, or a header name.
    #[arg(long, global = true, default_value = "last")]
    label_column: LabelColumn,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RankerArgs {
    /// ReliefF neighbour count.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// MIFS redundancy penalty.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Bins for mutual-information estimates.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// IFS weight between spread and decorrelation.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// IFS decay as a fraction of the inverse spectral radius.
    #[arg(long, default_value_t = 0.9)]
    r_factor: f64,
}

impl RankerArgs {
    fn params(&self) -> RankerParams {
        RankerParams {
            k_neighbors: self.k,
            iterations: None,
            beta: self.beta,
            bins: self.bins,
            alpha: self.alpha,
            r_factor: self.r_factor,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic datasets with manifests.
    Synth {
        /// Number of datasets to generate.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Lower the upper bound on samples per cluster.
        #[arg(long)]
        max_samples_per_cluster: Option<u32>,
    },
    /// Rank the features of a dataset; prints JSON.
    Rank {
        /// gifs, relieff, mifs or ifs.
        #[arg(long)]
        method: Method,
        /// Dataset CSV.
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        ranker: RankerArgs,
    },
    /// Print the six meta-features of a dataset as a one-row CSV.
    Meta {
        /// Dataset CSV.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Weighted-sum score of every method; prints JSON and writes curves to --out.
    Evaluate {
        /// Dataset CSV.
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        ranker: RankerArgs,
    },
    /// Build the synthetic repository and its labelled meta-dataset.
    BuildRepo {
        /// Number of synthetic datasets.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Lower the upper bound on samples per cluster.
        #[arg(long)]
        max_samples_per_cluster: Option<u32>,
        #[command(flatten)]
        ranker: RankerArgs,
    },
    /// Train the recommender from a meta-dataset CSV.
    Train {
        /// Meta-dataset CSV written by build-repo.
        #[arg(long)]
        meta: PathBuf,
    },
    /// Recommend a method for a dataset.
    Recommend {
        /// Model JSON written by train.
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Print JSON instead of plain text.
        #[arg(long)]
        json: bool,
    },
    /// Compare recommendations with the best method on a suite of datasets.
    Report {
        /// Model JSON written by train.
        #[arg(long)]
        model: PathBuf,
        /// Dataset CSVs to evaluate.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        ranker: RankerArgs,
    },
}

fn ranges(cap: Option<u32>) -> ParamRanges {
    cap.map_or_else(
        ParamRanges::default,
        ParamRanges::with_max_samples_per_cluster,
    )
}

fn settings(cli: &Cli, ranker: &RankerArgs) -> EvalSettings {
    EvalSettings {
        folds: cli.folds,
        seed: cli.seed,
        ranker: ranker.params(),
        ..EvalSettings::default()
    }
}

fn run_config(cli: &Cli, count: usize, eval: EvalSettings, cap: Option<u32>) -> RunConfig {
    RunConfig {
        count,
        master_seed: cli.seed,
        eval,
        ranges: ranges(cap),
        out_dir: cli
            .out
            .clone()
            .unwrap_or_else(|| RunConfig::default().out_dir),
        jobs: cli.jobs,
    }
}

fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
}

fn json_line(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: &Cli) -> Result<()> {
    let pool_config = run_config(cli, 1, EvalSettings::default(), None);
    match &cli.command {
        Command::Synth {
            count,
            max_samples_per_cluster,
        } => {
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("repository"));
            let r = ranges(*max_samples_per_cluster);
            pool_config.install(|| generate_repository(*count, cli.seed, &out, &r))??;
            info!("wrote {count} datasets to {}", out.display());
        }
        Command::Rank {
            method,
            input,
            ranker,
        } => {
            let data = load_csv(input, &cli.label_column)?;
            let params = ranker.params();
            let r = rank(*method, &data, &params)?;
            print(&json_line(&json!({
                "method": r.method,
                "order": r.order,
                "scores": r.scores,
                "params": params,
            }))?)?;
        }
        Command::Meta { input } => {
            let data = load_csv(input, &cli.label_column)?;
            let m = extract_meta(&data);
            let values: Vec<String> = m.to_array().iter().map(f64::to_string).collect();
            print(&format!(
                "{}\n{}\n",
                META_FEATURE_NAMES.join(","),
                values.join(",")
            ))?;
        }
        Command::Evaluate { input, ranker } => {
            let data = load_csv(input, &cli.label_column)?;
            let eval =
                pool_config.install(|| evaluate_methods(&data, &settings(cli, ranker)))??;
            if let Some(out) = &cli.out {
                write_curves(&eval.curves, out)?;
            }
            print(&json_line(&eval.table)?)?;
        }
        Command::BuildRepo {
            count,
            max_samples_per_cluster,
            ranker,
        } => {
            let config = run_config(cli, *count, settings(cli, ranker), *max_samples_per_cluster);
            let build = build_meta_dataset(&config)?;
            let counts = build.meta.label_counts();
            info!(
                "meta-dataset: {} rows, {} skipped, labels {:?}",
                build.meta.len(),
                build.provenance.skipped.len(),
                counts
            );
            print(&format!("{}\n", config.meta_csv_path().display()))?;
        }
        Command::Train { meta } => {
            let data = MetaDataset::load_csv(meta)?;
            let model = train_recommender(&data)?;
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("model.json"));
            model.save(&out)?;
            print(&format!("{}\n", out.display()))?;
        }
        Command::Recommend { model, input, json } => {
            let model = RecommenderModel::load(model)?;
            let data = load_csv(input, &cli.label_column)?;
            let rec = model.recommend(&extract_meta(&data))?;
            if *json {
                let sims: serde_json::Map<String, serde_json::Value> = rec
                    .similarities
                    .iter()
                    .map(|(m, s)| (m.name().to_string(), json!(s)))
                    .collect();
                print(&json_line(
                    &json!({ "method": rec.method, "similarities": sims }),
                )?)?;
            } else {
                let mut text = format!("{}\n", rec.method);
                for (m, s) in &rec.similarities {
                    text.push_str(&format!("{m}\t{s}\n"));
                }
                print(&text)?;
            }
        }
        Command::Report {
            model,
            inputs,
            ranker,
        } => {
            let model = RecommenderModel::load(model)?;
            let eval = settings(cli, ranker);
            let report =
                pool_config.install(|| evaluate_suite(&model, inputs, &cli.label_column, &eval))?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("report"));
            report.save(&out)?;
            print(&report.to_csv_string())?;
            if let Some(f) = report.failures.first() {
                return Err(Error::Dataset {
                    index: f.dataset.clone(),
                    source: Box::new(Error::InvalidParameter(f.error.clone())),
                });
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    if err.is_io() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsmeta: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn io_errors_exit_with_two() {
        let io = Error::Io {
            path: std::path::PathBuf::from("x"),
            source: std::io::Error::other("gone"),
        };
        assert_eq!(exit_code(&io), 2);
        assert_eq!(exit_code(&io.for_dataset(3)), 2);
        assert_eq!(exit_code(&Error::DegenerateLabels), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
