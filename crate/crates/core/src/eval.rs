//! Stratified repeated k-fold cross-validation with per-graph timing, and
//! dimensionality sweeps on top of it.
//!
//! Fold assignment depends only on `(seed, repeat)` and the labels, never on
//! the model or the dimension, so every model and every D sees the same
//! splits. The rank basis is rebuilt for each `(repeat, fold)` from a derived
//! stream of the same master seed.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{fit, predict};
use crate::error::{Error, Result};
use crate::graphhd::{encode_graphhd, fit_graphhd_encoded, predict_graphhd};
use crate::hdc::words_for;
use crate::message_passing::{encode_graph, EncoderConfig};
use crate::seed::{streams, SeedSpec};
use crate::spike::RankBasis;
use crate::tudataset::GraphDataset;

pub const REPORT_FORMAT: &str = "vsgraph-cv/1";

pub const CSV_HEADER: &str =
    "dataset,model,dim,repeat,fold,n_train,n_test,correct,accuracy,train_ms_per_graph,infer_ms_per_graph";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    VsGraph,
    GraphHd,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::VsGraph => "vsgraph",
            ModelKind::GraphHd => "graphhd",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vsgraph" => Ok(ModelKind::VsGraph),
            "graphhd" => Ok(ModelKind::GraphHd),
            _ => Err(Error::invalid(format!(
                "unknown model {s:?} (expected `vsgraph` or `graphhd`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub model: ModelKind,
    /// Encoder settings; `encoder.dim` is the dimension for [`run_cv`] and
    /// `encoder.seed` is replaced by the per-fold basis seed.
    pub encoder: EncoderConfig,
    /// Dimensions visited by [`run_dim_sweep`].
    pub dims: Vec<usize>,
    /// Worker threads for per-graph encoding; 1 runs inline.
    pub workers: usize,
    /// Run one untimed fold first.
    pub warmup: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            repeats: 3,
            seed: 0,
            model: ModelKind::VsGraph,
            encoder: EncoderConfig::default(),
            dims: vec![128, 256, 512, 1024, 2048, 4096, 8192],
            workers: 1,
            warmup: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Encoding plus prototype construction, per training graph.
    pub train_ms_per_graph: f64,
    /// Encoding plus prediction, per test graph.
    pub infer_ms_per_graph: f64,
    /// Basis generation for this fold.
    pub setup_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub format_version: String,
    pub dataset: String,
    pub model: ModelKind,
    pub dim: usize,
    pub config: CvConfig,
    pub folds: Vec<FoldResult>,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over folds.
    pub std_accuracy: f64,
    /// Total correct over total tested.
    pub weighted_mean_accuracy: f64,
    pub train_time_per_graph_ms: f64,
    pub infer_time_per_graph_ms: f64,
    pub train_time_per_graph_ms_median: f64,
    pub infer_time_per_graph_ms_median: f64,
    pub setup_ms_mean: f64,
    pub bytes_per_hypervector: usize,
    /// Graphs without edges; GraphHD encodes them as the zero vector.
    pub edgeless_graphs: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub format_version: String,
    pub dataset: String,
    pub model: ModelKind,
    pub runs: Vec<CvReport>,
}

impl SweepReport {
    /// `(D, mean accuracy)` per swept dimension.
    pub fn series(&self) -> Vec<(usize, f64)> {
        self.runs.iter().map(|r| (r.dim, r.mean_accuracy)).collect()
    }
}

pub fn fold_seed(master_seed: u64, repeat: usize) -> SeedSpec {
    SeedSpec::new(master_seed, streams::FOLDS).derive(repeat as u64, 0)
}

pub fn basis_seed(master_seed: u64, repeat: usize, fold: usize) -> SeedSpec {
    SeedSpec::new(master_seed, streams::BASIS).derive(repeat as u64, fold as u64)
}

/// Splits indices into `k` disjoint folds, class by class.
///
/// Members of each class are shuffled and dealt round-robin, continuing from
/// where the previous class stopped, so per-class counts across folds differ
/// by at most one and total fold sizes are balanced too.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: SeedSpec) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(Error::invalid(format!(
                "class {c} has {} members, fewer than {k} folds",
                members.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rng_seed());
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

fn validate(dataset: &GraphDataset, config: &CvConfig) -> Result<()> {
    dataset.validate()?;
    config.encoder.validate()?;
    if config.repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    if config.workers == 0 {
        return Err(Error::invalid("workers must be at least 1"));
    }
    let smallest = dataset.class_counts().into_iter().min().unwrap_or(0);
    if config.folds < 2 || config.folds > smallest {
        return Err(Error::invalid(format!(
            "folds must be in 2..={smallest} (smallest class), got {}",
            config.folds
        )));
    }
    Ok(())
}

struct Runner {
    pool: Option<rayon::ThreadPool>,
}

impl Runner {
    fn new(workers: usize) -> Result<Self> {
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { pool })
    }

    fn map<T, F>(&self, indices: &[usize], f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| indices.par_iter().map(|&i| f(i)).collect()),
            None => indices.iter().map(|&i| f(i)).collect(),
        }
    }
}

struct FoldTiming {
    correct: usize,
    train: Duration,
    infer: Duration,
    setup: Duration,
}

fn run_fold(
    dataset: &GraphDataset,
    train: &[usize],
    test: &[usize],
    model: ModelKind,
    encoder: &EncoderConfig,
    runner: &Runner,
) -> Result<FoldTiming> {
    let start = Instant::now();
    let basis = RankBasis::with_capacity(encoder.seed, encoder.dim, dataset.max_nodes())?;
    let setup = start.elapsed();

    let train_labels: Vec<usize> = train.iter().map(|&i| dataset.labels[i]).collect();
    let graphs = &dataset.graphs;
    let (correct, train_time, infer_time) = match model {
        ModelKind::VsGraph => {
            let t0 = Instant::now();
            let zs = runner.map(train, |i| encode_graph(&graphs[i], encoder, &basis))?;
            let fitted = fit(&zs, &train_labels, dataset.num_classes, *encoder)?;
            let train_time = t0.elapsed();

            let t1 = Instant::now();
            let preds = runner.map(test, |i| {
                predict(&fitted, &encode_graph(&graphs[i], encoder, &basis)?)
            })?;
            (
                count_correct(dataset, test, &preds),
                train_time,
                t1.elapsed(),
            )
        }
        ModelKind::GraphHd => {
            let t0 = Instant::now();
            let hvs = runner.map(train, |i| encode_graphhd(&graphs[i], &basis))?;
            let fitted =
                fit_graphhd_encoded(&hvs, &train_labels, dataset.num_classes, basis.seed())?;
            let train_time = t0.elapsed();

            let t1 = Instant::now();
            let preds = runner.map(test, |i| {
                predict_graphhd(&fitted, &encode_graphhd(&graphs[i], &basis)?)
            })?;
            (
                count_correct(dataset, test, &preds),
                train_time,
                t1.elapsed(),
            )
        }
    };
    Ok(FoldTiming {
        correct,
        train: train_time,
        infer: infer_time,
        setup,
    })
}

fn count_correct(dataset: &GraphDataset, test: &[usize], preds: &[usize]) -> usize {
    test.iter()
        .zip(preds)
        .filter(|(&i, &p)| dataset.labels[i] == p)
        .count()
}

fn ms_per(d: Duration, n: usize) -> f64 {
    d.as_secs_f64() * 1e3 / n.max(1) as f64
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    }
}

fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    fold.iter().for_each(|&i| in_fold[i] = true);
    (0..n).filter(|&i| !in_fold[i]).collect()
}

/// Repeated stratified k-fold cross-validation at `config.encoder.dim`.
pub fn run_cv(dataset: &GraphDataset, config: &CvConfig) -> Result<CvReport> {
    validate(dataset, config)?;
    let runner = Runner::new(config.workers)?;
    let n = dataset.len();
    let encoder_for = |repeat, fold| EncoderConfig {
        seed: basis_seed(config.seed, repeat, fold),
        ..config.encoder
    };

    let splits = (0..config.repeats)
        .map(|r| stratified_kfold(&dataset.labels, config.folds, fold_seed(config.seed, r)))
        .collect::<Result<Vec<_>>>()?;

    if config.warmup {
        let test = &splits[0][0];
        run_fold(
            dataset,
            &complement(n, test),
            test,
            config.model,
            &encoder_for(0, 0),
            &runner,
        )?;
    }

    let mut folds = Vec::with_capacity(config.repeats * config.folds);
    for (repeat, split) in splits.iter().enumerate() {
        for (fold, test) in split.iter().enumerate() {
            let train = complement(n, test);
            let t = run_fold(
                dataset,
                &train,
                test,
                config.model,
                &encoder_for(repeat, fold),
                &runner,
            )?;
            folds.push(FoldResult {
                repeat,
                fold,
                n_train: train.len(),
                n_test: test.len(),
                correct: t.correct,
                accuracy: t.correct as f64 / test.len() as f64,
                train_ms_per_graph: ms_per(t.train, train.len()),
                infer_ms_per_graph: ms_per(t.infer, test.len()),
                setup_ms: t.setup.as_secs_f64() * 1e3,
            });
        }
    }
    Ok(summarize(dataset, config, folds))
}

fn summarize(dataset: &GraphDataset, config: &CvConfig, folds: Vec<FoldResult>) -> CvReport {
    let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let train: Vec<f64> = folds.iter().map(|f| f.train_ms_per_graph).collect();
    let infer: Vec<f64> = folds.iter().map(|f| f.infer_ms_per_graph).collect();
    let setup: Vec<f64> = folds.iter().map(|f| f.setup_ms).collect();
    let correct: usize = folds.iter().map(|f| f.correct).sum();
    let tested: usize = folds.iter().map(|f| f.n_test).sum();
    CvReport {
        format_version: REPORT_FORMAT.to_owned(),
        dataset: dataset.name.clone(),
        model: config.model,
        dim: config.encoder.dim,
        config: config.clone(),
        mean_accuracy: mean(&acc),
        std_accuracy: sample_std(&acc),
        weighted_mean_accuracy: correct as f64 / tested.max(1) as f64,
        train_time_per_graph_ms: mean(&train),
        infer_time_per_graph_ms: mean(&infer),
        train_time_per_graph_ms_median: median(&train),
        infer_time_per_graph_ms_median: median(&infer),
        setup_ms_mean: mean(&setup),
        bytes_per_hypervector: words_for(config.encoder.dim) * 8,
        edgeless_graphs: dataset.graphs.iter().filter(|g| g.num_edges() == 0).count(),
        workers: config.workers,
        per_fold_accuracy: acc,
        folds,
    }
}

/// Runs [`run_cv`] once per dimension in `config.dims`, all else fixed.
pub fn run_dim_sweep(dataset: &GraphDataset, config: &CvConfig) -> Result<SweepReport> {
    if config.dims.is_empty() {
        return Err(Error::invalid("no dimensions to sweep"));
    }
    if config.dims.contains(&0) {
        return Err(Error::InvalidDimension(0));
    }
    let runs = config
        .dims
        .iter()
        .map(|&dim| {
            let mut c = config.clone();
            c.encoder.dim = dim;
            run_cv(dataset, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        format_version: REPORT_FORMAT.to_owned(),
        dataset: dataset.name.clone(),
        model: config.model,
        runs,
    })
}

/// One CSV line per fold (no trailing newline).
pub fn csv_rows(report: &CvReport) -> Vec<String> {
    report
        .folds
        .iter()
        .map(|f| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                report.dataset,
                report.model,
                report.dim,
                f.repeat,
                f.fold,
                f.n_train,
                f.n_test,
                f.correct,
                f.accuracy,
                f.train_ms_per_graph,
                f.infer_ms_per_graph
            )
        })
        .collect()
}

/// Header plus one row per repeat, fold and dimension.
pub fn to_csv<'a>(reports: impl IntoIterator<Item = &'a CvReport>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        for row in csv_rows(r) {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

/// Gnuplot-friendly `D mean_accuracy` series.
pub fn series_text(sweep: &SweepReport) -> String {
    let mut out = format!("# {} {} D mean_accuracy\n", sweep.dataset, sweep.model);
    for (d, acc) in sweep.series() {
        let _ = writeln!(out, "{d} {acc}");
    }
    out
}
