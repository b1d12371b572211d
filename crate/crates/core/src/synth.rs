//! Madelon-style synthetic binary classification data.
//!
//! Useful features are Gaussian clusters placed on vertices of a hypercube,
//! redundant features are exact linear mixes of the useful ones, repeated
//! features copy useful/redundant columns, and useless features are noise.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Offset between master seeds when deriving per-dataset parameter seeds.
pub const SEED_STRIDE: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub classes: u32,
    pub useful: u32,
    pub redundant: u32,
    pub repeated: u32,
    pub useless: u32,
    pub samples_per_cluster: u32,
    pub clusters_per_class: u32,
    pub seed: u32,
    pub hypercube_factor: u32,
    pub flip_fraction: f64,
    pub permute: bool,
}

/// Inclusive sampling bounds for every generator parameter. The default is
/// the full parameter space; narrower bounds are used for quick runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub useful: (u32, u32),
    pub redundant: (u32, u32),
    pub repeated: (u32, u32),
    pub useless: (u32, u32),
    pub samples_per_cluster: (u32, u32),
    pub clusters_per_class: (u32, u32),
    pub seed: (u32, u32),
    pub hypercube_factor: (u32, u32),
    /// Label flip fraction in whole percent.
    pub flip_percent: (u32, u32),
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            useful: (4, 20),
            redundant: (0, 20),
            repeated: (0, 20),
            useless: (0, 20),
            samples_per_cluster: (10, 70),
            clusters_per_class: (2, 7),
            seed: (1, 1000),
            hypercube_factor: (2, 10),
            flip_percent: (1, 10),
        }
    }
}

impl ParamRanges {
    /// Default bounds with the samples-per-cluster upper bound lowered.
    pub fn with_max_samples_per_cluster(cap: u32) -> Self {
        let mut r = ParamRanges::default();
        r.samples_per_cluster.1 = cap.clamp(r.samples_per_cluster.0, r.samples_per_cluster.1);
        r
    }

    fn check_within(&self) -> Result<()> {
        let full = ParamRanges::default();
        let pairs = [
            ("useful", self.useful, full.useful),
            ("redundant", self.redundant, full.redundant),
            ("repeated", self.repeated, full.repeated),
            ("useless", self.useless, full.useless),
            (
                "samples_per_cluster",
                self.samples_per_cluster,
                full.samples_per_cluster,
            ),
            (
                "clusters_per_class",
                self.clusters_per_class,
                full.clusters_per_class,
            ),
            ("seed", self.seed, full.seed),
            (
                "hypercube_factor",
                self.hypercube_factor,
                full.hypercube_factor,
            ),
            ("flip_percent", self.flip_percent, full.flip_percent),
        ];
        for (name, (lo, hi), (flo, fhi)) in pairs {
            if lo > hi || lo < flo || hi > fhi {
                return Err(Error::InvalidParameter(format!(
                    "{name} range [{lo}, {hi}] outside [{flo}, {fhi}]"
                )));
            }
        }
        Ok(())
    }
}

impl SynthParams {
    /// Draw every parameter uniformly and independently over its full range.
    pub fn sample(seed: u64) -> SynthParams {
        SynthParams::sample_within(seed, &ParamRanges::default()).expect("default ranges are valid")
    }

    pub fn sample_within(seed: u64, ranges: &ParamRanges) -> Result<SynthParams> {
        ranges.check_within()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |(lo, hi): (u32, u32)| rng.random_range(lo..=hi);
        let useful = draw(ranges.useful);
        let redundant = draw(ranges.redundant);
        let repeated = draw(ranges.repeated);
        let useless = draw(ranges.useless);
        let samples_per_cluster = draw(ranges.samples_per_cluster);
        let clusters_per_class = draw(ranges.clusters_per_class);
        let p_seed = draw(ranges.seed);
        let hypercube_factor = draw(ranges.hypercube_factor);
        let flip_percent = draw(ranges.flip_percent);
        let permute = draw((0, 1)) == 1;
        Ok(SynthParams {
            classes: 2,
            useful,
            redundant,
            repeated,
            useless,
            samples_per_cluster,
            clusters_per_class,
            seed: p_seed,
            hypercube_factor,
            flip_fraction: f64::from(flip_percent) / 100.0,
            permute,
        })
    }

    pub fn n_features(&self) -> usize {
        (self.useful + self.redundant + self.repeated + self.useless) as usize
    }

    pub fn n_samples(&self) -> usize {
        2 * (self.samples_per_cluster * self.clusters_per_class) as usize
    }

    fn flip_percent(&self) -> u64 {
        (self.flip_fraction * 100.0).round() as u64
    }

    /// Number of labels to flip: `flip_fraction * S` rounded to nearest,
    /// halves rounded up. Computed in integers so grid values are exact.
    pub fn flip_count(&self) -> usize {
        ((self.flip_percent() * self.n_samples() as u64 + 50) / 100) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.classes != 2 {
            return bad("only two classes are supported");
        }
        let r = ParamRanges::default();
        let within = |v: u32, (lo, hi): (u32, u32)| (lo..=hi).contains(&v);
        if !within(self.useful, r.useful) {
            return bad("useful feature count outside [4, 20]");
        }
        if !within(self.redundant, r.redundant)
            || !within(self.repeated, r.repeated)
            || !within(self.useless, r.useless)
        {
            return bad("redundant/repeated/useless count outside [0, 20]");
        }
        if !within(self.samples_per_cluster, r.samples_per_cluster) {
            return bad("samples per cluster outside [10, 70]");
        }
        if !within(self.clusters_per_class, r.clusters_per_class) {
            return bad("clusters per class outside [2, 7]");
        }
        if !within(self.seed, r.seed) {
            return bad("seed outside [1, 1000]");
        }
        if !within(self.hypercube_factor, r.hypercube_factor) {
            return bad("hypercube factor outside [2, 10]");
        }
        let pct = self.flip_fraction * 100.0;
        if (pct - pct.round()).abs() > 1e-9 || !(1.0..=10.0).contains(&pct.round()) {
            return bad("flip fraction must be one of 0.01, 0.02, ..., 0.10");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Useful,
    Redundant,
    Repeated,
    Useless,
}

/// Ground truth about how a synthetic dataset was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub params: SynthParams,
    /// Role of each output column.
    pub column_roles: Vec<ColumnRole>,
    /// `permutation[i]` is the pre-permutation index of output column `i`.
    /// Pre-permutation order is useful, redundant, repeated, useless.
    pub permutation: Vec<usize>,
    /// Pre-permutation source column of each repeated column.
    pub repeated_sources: Vec<usize>,
    /// Sample indices whose labels were flipped, ascending.
    pub flipped_indices: Vec<usize>,
}

impl SynthManifest {
    /// Output column index holding pre-permutation column `source`.
    pub fn output_column(&self, source: usize) -> usize {
        self.permutation
            .iter()
            .position(|&p| p == source)
            .expect("permutation is a bijection")
    }
}

// Independent random substreams for each generation step.
const STREAM_CENTROIDS: u64 = 1;
const STREAM_CLUSTERS: u64 = 2;
const STREAM_MIXING: u64 = 3;
const STREAM_REPEATS: u64 = 4;
const STREAM_USELESS: u64 = 5;
const STREAM_FLIPS: u64 = 6;
const STREAM_PERMUTE: u64 = 7;

fn substream(seed: u32, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
    rng.set_stream(stream);
    rng
}

pub fn synthesize(params: &SynthParams) -> Result<(Dataset, SynthManifest)> {
    params.validate()?;
    let dims = params.useful as usize;
    let n_centroids = 2 * params.clusters_per_class as usize;
    if dims < 64 && n_centroids as u64 > (1u64 << dims) {
        return Err(Error::InvalidParameter(format!(
            "{n_centroids} clusters need more than the {} hypercube vertices",
            1u64 << dims
        )));
    }
    let per_cluster = params.samples_per_cluster as usize;
    let s = params.n_samples();
    let half_side = f64::from(params.hypercube_factor);

    // 1. distinct hypercube vertices, alternating class assignment
    let mut rng = substream(params.seed, STREAM_CENTROIDS);
    let mask = if dims >= 64 {
        u64::MAX
    } else {
        (1u64 << dims) - 1
    };
    let mut vertices: Vec<u64> = Vec::with_capacity(n_centroids);
    while vertices.len() < n_centroids {
        let v = rng.random::<u64>() & mask;
        if !vertices.contains(&v) {
            vertices.push(v);
        }
    }

    // 2. unit-variance Gaussian clusters around each vertex
    let mut rng = substream(params.seed, STREAM_CLUSTERS);
    let mut useful = DMatrix::<f64>::zeros(s, dims);
    let mut labels = Vec::with_capacity(s);
    for (c, &vertex) in vertices.iter().enumerate() {
        for k in 0..per_cluster {
            let row = c * per_cluster + k;
            for d in 0..dims {
                let centre = if vertex >> d & 1 == 1 {
                    half_side
                } else {
                    -half_side
                };
                let noise: f64 = rng.sample(StandardNormal);
                useful[(row, d)] = centre + noise;
            }
            labels.push((c % 2) as u8);
        }
    }

    // 3. redundant = useful * mixing
    let mut rng = substream(params.seed, STREAM_MIXING);
    let n_redundant = params.redundant as usize;
    let mixing = DMatrix::from_fn(dims, n_redundant, |_, _| rng.random_range(-1.0..=1.0));
    let redundant = &useful * &mixing;

    // 4. repeated copies drawn from useful ∪ redundant
    let mut rng = substream(params.seed, STREAM_REPEATS);
    let pool = dims + n_redundant;
    let repeated_sources: Vec<usize> = (0..params.repeated)
        .map(|_| rng.random_range(0..pool))
        .collect();

    // 5. label-independent noise
    let mut rng = substream(params.seed, STREAM_USELESS);
    let n_useless = params.useless as usize;
    let useless = DMatrix::from_fn(s, n_useless, |_, _| rng.sample::<f64, _>(StandardNormal));

    let n = params.n_features();
    let mut pre = DMatrix::<f64>::zeros(s, n);
    let mut roles = Vec::with_capacity(n);
    pre.columns_mut(0, dims).copy_from(&useful);
    roles.extend(std::iter::repeat_n(ColumnRole::Useful, dims));
    pre.columns_mut(dims, n_redundant).copy_from(&redundant);
    roles.extend(std::iter::repeat_n(ColumnRole::Redundant, n_redundant));
    for (r, &src) in repeated_sources.iter().enumerate() {
        let col = pre.column(src).clone_owned();
        pre.set_column(pool + r, &col);
        roles.push(ColumnRole::Repeated);
    }
    pre.columns_mut(pool + repeated_sources.len(), n_useless)
        .copy_from(&useless);
    roles.extend(std::iter::repeat_n(ColumnRole::Useless, n_useless));

    // 6. flip labels
    let mut rng = substream(params.seed, STREAM_FLIPS);
    let mut flipped = rand::seq::index::sample(&mut rng, s, params.flip_count()).into_vec();
    flipped.sort_unstable();
    for &i in &flipped {
        labels[i] ^= 1;
    }

    // 7. optional column permutation
    let mut permutation: Vec<usize> = (0..n).collect();
    if params.permute {
        let mut rng = substream(params.seed, STREAM_PERMUTE);
        permutation.shuffle(&mut rng);
    }
    let values = pre.select_columns(&permutation);
    let column_roles = permutation.iter().map(|&p| roles[p]).collect();

    let data = Dataset::new(values, labels)?;
    let manifest = SynthManifest {
        params: params.clone(),
        column_roles,
        permutation,
        repeated_sources,
        flipped_indices: flipped,
    };
    Ok((data, manifest))
}

/// Parameter seed for dataset `index` of a repository.
pub fn dataset_seed(master_seed: u64, index: usize) -> u64 {
    master_seed
        .wrapping_mul(SEED_STRIDE)
        .wrapping_add(index as u64)
}

/// Generate dataset `index` of the repository identified by `master_seed`.
pub fn repository_entry(
    master_seed: u64,
    index: usize,
    ranges: &ParamRanges,
) -> Result<(Dataset, SynthManifest)> {
    let params = SynthParams::sample_within(dataset_seed(master_seed, index), ranges)?;
    synthesize(&params)
}

pub fn dataset_file_stem(index: usize) -> String {
    format!("ds_{index}")
}

pub fn save_entry(
    out_dir: &Path,
    index: usize,
    data: &Dataset,
    manifest: &SynthManifest,
) -> Result<()> {
    let stem = dataset_file_stem(index);
    data.save_csv(out_dir.join(format!("{stem}.csv")))?;
    let path = out_dir.join(format!("{stem}.manifest.json"));
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

/// Generate and persist `count` datasets as `ds_<i>.csv` plus
/// `ds_<i>.manifest.json` under `out_dir`.
pub fn generate_repository(
    count: usize,
    master_seed: u64,
    out_dir: impl AsRef<Path>,
    ranges: &ParamRanges,
) -> Result<Vec<(Dataset, SynthManifest)>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "repository count must be at least 1".into(),
        ));
    }
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (data, manifest) =
                repository_entry(master_seed, i, ranges).map_err(|e| e.for_dataset(i))?;
            save_entry(out_dir, i, &data, &manifest)?;
            Ok((data, manifest))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> SynthParams {
        SynthParams {
            classes: 2,
            useful: 4,
            redundant: 2,
            repeated: 1,
            useless: 3,
            samples_per_cluster: 10,
            clusters_per_class: 2,
            seed: 17,
            hypercube_factor: 2,
            flip_fraction: 0.05,
            permute: true,
        }
    }

    #[test]
    fn shape_from_params() {
        let (d, m) = synthesize(&small_params()).unwrap();
        assert_eq!(d.n_features(), 10);
        assert_eq!(d.n_samples(), 40);
        assert_eq!(m.column_roles.len(), 10);
        let count = |role| m.column_roles.iter().filter(|&&r| r == role).count();
        assert_eq!(count(ColumnRole::Useful), 4);
        assert_eq!(count(ColumnRole::Redundant), 2);
        assert_eq!(count(ColumnRole::Repeated), 1);
        assert_eq!(count(ColumnRole::Useless), 3);
    }

    #[test]
    fn flip_count_rounding() {
        let mut p = small_params();
        p.flip_fraction = 0.10;
        p.samples_per_cluster = 40;
        p.clusters_per_class = 5;
        assert_eq!(p.n_samples(), 400);
        assert_eq!(p.flip_count(), 40);
        let (_, m) = synthesize(&p).unwrap();
        assert_eq!(m.flipped_indices.len(), 40);

        // 0.05 * 50 = 2.5 rounds up
        p.samples_per_cluster = 25;
        p.clusters_per_class = 1;
        assert_eq!(p.flip_count(), 5);
        p.flip_fraction = 0.05;
        assert_eq!(p.flip_count(), 3);
    }

    #[test]
    fn sample_is_deterministic_and_on_grid() {
        assert_eq!(SynthParams::sample(42), SynthParams::sample(42));
        for seed in 0..500 {
            let p = SynthParams::sample(seed);
            p.validate().unwrap();
            let pct = (1..=10).find(|&k| p.flip_fraction == f64::from(k) / 100.0);
            assert!(pct.is_some(), "{}", p.flip_fraction);
        }
    }

    #[test]
    fn capped_sampling() {
        let r = ParamRanges::with_max_samples_per_cluster(30);
        for seed in 0..200 {
            let p = SynthParams::sample_within(seed, &r).unwrap();
            assert!(p.samples_per_cluster <= 30);
        }
        let bad = ParamRanges {
            useful: (2, 20),
            ..ParamRanges::default()
        };
        assert!(SynthParams::sample_within(0, &bad).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = small_params();
        p.useful = 3;
        assert!(synthesize(&p).is_err());
        let mut p = small_params();
        p.flip_fraction = 0.015;
        assert!(synthesize(&p).is_err());
        let mut p = small_params();
        p.classes = 3;
        assert!(synthesize(&p).is_err());
    }

    #[test]
    fn repeated_columns_are_copies() {
        let mut p = small_params();
        p.repeated = 6;
        let (d, m) = synthesize(&p).unwrap();
        let pool = (p.useful + p.redundant) as usize;
        for (r, &src) in m.repeated_sources.iter().enumerate() {
            let a = d.column(m.output_column(pool + r));
            let b = d.column(m.output_column(src));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn class_balance_before_flipping() {
        let (d, m) = synthesize(&small_params()).unwrap();
        let mut labels = d.labels().to_vec();
        for &i in &m.flipped_indices {
            labels[i] ^= 1;
        }
        let ones = labels.iter().filter(|&&l| l == 1).count();
        assert_eq!(ones, 20);
    }

    #[test]
    fn permute_flag_only_reorders_columns() {
        let mut p = small_params();
        p.permute = false;
        let (plain, mp) = synthesize(&p).unwrap();
        p.permute = true;
        let (perm, mq) = synthesize(&p).unwrap();
        assert_eq!(mp.permutation, (0..10).collect::<Vec<_>>());
        assert_eq!(plain.labels(), perm.labels());
        for (i, &src) in mq.permutation.iter().enumerate() {
            assert_eq!(perm.column(i), plain.column(src));
        }
    }
}
