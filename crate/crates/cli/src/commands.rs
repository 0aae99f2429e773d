use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use vsgraph_core::classifier::predict_scores;
use vsgraph_core::eval::{series_text, to_csv, REPORT_FORMAT};
use vsgraph_core::graphhd::{fit_graphhd_encoded, graphhd_scores};
use vsgraph_core::persist::{read_model, write_model};
use vsgraph_core::spike::RankBasis;
use vsgraph_core::tudataset::DatasetStats;
use vsgraph_core::{
    encode_graph, encode_graphhd, fit, parse_tudataset, run_cv, run_dim_sweep, CvReport,
    GraphDataset, ModelKind, SavedModel, SweepReport,
};

use crate::manifest::RunManifest;

pub const MODEL_META_FORMAT: &str = "vsgraph-model/1";

#[derive(Serialize)]
struct CvDocument<'a> {
    format_version: &'static str,
    command: &'static str,
    manifest: &'a RunManifest,
    dataset_path: &'a Path,
    stats: DatasetStats,
    reports: &'a [CvReport],
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    format_version: &'static str,
    command: &'static str,
    manifest: &'a RunManifest,
    dataset_path: &'a Path,
    stats: DatasetStats,
    sweeps: &'a [SweepReport],
}

/// Sidecar written next to a model file.
#[derive(Debug, Serialize, Deserialize)]
struct ModelMeta {
    format_version: String,
    model: ModelKind,
    dim: usize,
    num_classes: usize,
    /// Raw dataset label behind each class index.
    class_labels: Vec<i64>,
    dataset: String,
    num_graphs: usize,
    manifest: RunManifest,
}

fn load_dataset(m: &RunManifest) -> Result<(GraphDataset, PathBuf)> {
    let (dir, name) = m.dataset_location();
    ensure!(
        dir.is_dir(),
        "dataset directory {} does not exist",
        dir.display()
    );
    let ds = parse_tudataset(&dir, &name)
        .with_context(|| format!("cannot load dataset {}", dir.display()))?;
    ds.validate()?;
    Ok((ds, dir))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text)
}

fn print_header() {
    println!(
        "{:<12} {:<8} {:>6} {:>17} {:>14} {:>14}",
        "dataset", "model", "D", "accuracy", "train ms/graph", "infer ms/graph"
    );
}

fn print_row(r: &CvReport) {
    println!(
        "{:<12} {:<8} {:>6} {:>8.4} ± {:<6.4} {:>14.4} {:>14.4}",
        r.dataset,
        r.model.as_str(),
        r.dim,
        r.mean_accuracy,
        r.std_accuracy,
        r.train_time_per_graph_ms,
        r.infer_time_per_graph_ms
    );
}

pub fn cv(m: &RunManifest) -> Result<()> {
    let (ds, dir) = load_dataset(m)?;
    let reports = m
        .models
        .iter()
        .map(|&model| run_cv(&ds, &m.cv_config(model)).map_err(Into::into))
        .collect::<Result<Vec<_>>>()?;
    write_json(
        &m.out_dir.join("cv.json"),
        &CvDocument {
            format_version: REPORT_FORMAT,
            command: "cv",
            manifest: m,
            dataset_path: &dir,
            stats: ds.stats(),
            reports: &reports,
        },
    )?;
    write_file(&m.out_dir.join("cv.csv"), to_csv(&reports))?;
    write_file(&m.out_dir.join("manifest.toml"), m.to_toml())?;
    print_header();
    reports.iter().for_each(print_row);
    Ok(())
}

pub fn sweep(m: &RunManifest) -> Result<()> {
    let (ds, dir) = load_dataset(m)?;
    let sweeps = m
        .models
        .iter()
        .map(|&model| run_dim_sweep(&ds, &m.cv_config(model)).map_err(Into::into))
        .collect::<Result<Vec<_>>>()?;
    write_json(
        &m.out_dir.join("sweep.json"),
        &SweepDocument {
            format_version: REPORT_FORMAT,
            command: "sweep",
            manifest: m,
            dataset_path: &dir,
            stats: ds.stats(),
            sweeps: &sweeps,
        },
    )?;
    write_file(
        &m.out_dir.join("sweep.csv"),
        to_csv(sweeps.iter().flat_map(|s| &s.runs)),
    )?;
    for s in &sweeps {
        let name = format!("series_{}_{}.dat", s.dataset, s.model.as_str());
        write_file(&m.out_dir.join(name), series_text(s))?;
    }
    write_file(&m.out_dir.join("manifest.toml"), m.to_toml())?;
    print_header();
    sweeps.iter().flat_map(|s| &s.runs).for_each(print_row);
    Ok(())
}

fn model_path(m: &RunManifest) -> PathBuf {
    m.model_file
        .clone()
        .unwrap_or_else(|| m.out_dir.join("model.vsgm"))
}

fn sidecar_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Manifest recorded when the model at `model` was trained, if any.
pub fn sidecar_manifest(model: &Path) -> Result<Option<RunManifest>> {
    Ok(read_meta(model)?.map(|meta| meta.manifest))
}

fn read_meta(model: &Path) -> Result<Option<ModelMeta>> {
    let path = sidecar_path(model);
    if !path.exists() {
        return Ok(None);
    }
    let text =
        fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let meta: ModelMeta =
        serde_json::from_str(&text).with_context(|| format!("invalid {}", path.display()))?;
    ensure!(
        meta.format_version == MODEL_META_FORMAT,
        "{}: unsupported metadata format {:?}, expected {MODEL_META_FORMAT:?}",
        path.display(),
        meta.format_version
    );
    Ok(Some(meta))
}

pub fn train(m: &RunManifest) -> Result<()> {
    let model_kind = m.single_model()?;
    let (ds, _) = load_dataset(m)?;
    let seed = m.train_seed();
    let encoder = m.encoder(seed);
    let start = Instant::now();
    let basis = RankBasis::with_capacity(seed, m.dim, ds.max_nodes())?;
    let saved = match model_kind {
        ModelKind::VsGraph => {
            let zs = ds
                .graphs
                .iter()
                .map(|g| encode_graph(g, &encoder, &basis))
                .collect::<vsgraph_core::Result<Vec<_>>>()?;
            SavedModel::VsGraph(fit(&zs, &ds.labels, ds.num_classes, encoder)?)
        }
        ModelKind::GraphHd => {
            let hvs = ds
                .graphs
                .iter()
                .map(|g| encode_graphhd(g, &basis))
                .collect::<vsgraph_core::Result<Vec<_>>>()?;
            SavedModel::GraphHd(fit_graphhd_encoded(&hvs, &ds.labels, ds.num_classes, seed)?)
        }
    };
    let elapsed = start.elapsed();
    let path = model_path(m);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    write_model(&path, &saved)?;
    write_json(
        &sidecar_path(&path),
        &ModelMeta {
            format_version: MODEL_META_FORMAT.into(),
            model: model_kind,
            dim: m.dim,
            num_classes: ds.num_classes,
            class_labels: ds.raw_labels.clone(),
            dataset: ds.name.clone(),
            num_graphs: ds.len(),
            manifest: m.clone(),
        },
    )?;
    println!(
        "{:<12} {:<8} {:>6} {:>8} {:>8} {:>14}",
        "dataset", "model", "D", "graphs", "classes", "train ms/graph"
    );
    println!(
        "{:<12} {:<8} {:>6} {:>8} {:>8} {:>14.4}",
        ds.name,
        model_kind.as_str(),
        m.dim,
        ds.len(),
        ds.num_classes,
        elapsed.as_secs_f64() * 1e3 / ds.len() as f64
    );
    println!("model written to {}", path.display());
    Ok(())
}

pub fn predict(m: &RunManifest) -> Result<()> {
    let path = m.model_file.clone().context("predict needs --model-file")?;
    let saved =
        read_model(&path).with_context(|| format!("cannot load model {}", path.display()))?;
    if saved.dim() != m.dim {
        bail!(
            "dimension mismatch: model {} has D={} but the manifest asks for D={}",
            path.display(),
            saved.dim(),
            m.dim
        );
    }
    let class_labels = match read_meta(&path)? {
        Some(meta) => {
            ensure!(
                meta.class_labels.len() == saved.num_classes(),
                "sidecar lists {} classes but the model has {}",
                meta.class_labels.len(),
                saved.num_classes()
            );
            meta.class_labels
        }
        None => (0..saved.num_classes() as i64).collect(),
    };
    let (ds, _) = load_dataset(m)?;

    let start = Instant::now();
    let scores: Vec<Vec<f64>> = match &saved {
        SavedModel::VsGraph(model) => {
            let basis = RankBasis::with_capacity(model.config.seed, model.dim(), ds.max_nodes())?;
            ds.graphs
                .iter()
                .map(|g| predict_scores(model, &encode_graph(g, &model.config, &basis)?))
                .collect::<vsgraph_core::Result<_>>()?
        }
        SavedModel::GraphHd(model) => {
            let basis = RankBasis::with_capacity(model.seed, model.dim, ds.max_nodes())?;
            ds.graphs
                .iter()
                .map(|g| graphhd_scores(model, &encode_graphhd(g, &basis)?))
                .collect::<vsgraph_core::Result<_>>()?
        }
    };
    let elapsed = start.elapsed();

    let mut csv = String::from("graph,predicted,label");
    for c in 0..saved.num_classes() {
        csv.push_str(&format!(",score_{c}"));
    }
    csv.push('\n');
    let mut correct = 0;
    for (i, s) in scores.iter().enumerate() {
        let predicted = class_labels[argmax(s)];
        let label = ds.raw_labels[ds.labels[i]];
        correct += usize::from(predicted == label);
        csv.push_str(&format!("{i},{predicted},{label}"));
        for v in s {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    let out = m
        .predictions
        .clone()
        .unwrap_or_else(|| m.out_dir.join("predictions.csv"));
    write_file(&out, csv)?;

    println!(
        "{:<12} {:<8} {:>6} {:>8} {:>9} {:>14}",
        "dataset", "model", "D", "graphs", "accuracy", "infer ms/graph"
    );
    println!(
        "{:<12} {:<8} {:>6} {:>8} {:>9.4} {:>14.4}",
        ds.name,
        saved.kind_name(),
        saved.dim(),
        ds.len(),
        correct as f64 / ds.len() as f64,
        elapsed.as_secs_f64() * 1e3 / ds.len() as f64
    );
    println!("predictions written to {}", out.display());
    Ok(())
}

/// First maximal index, matching the classifiers' tie rule.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn validate_dataset(m: &RunManifest) -> Result<()> {
    let (ds, dir) = load_dataset(m)?;
    let s = ds.stats();
    println!("path           {}", dir.display());
    println!("name           {}", s.name);
    println!("graphs         {}", s.num_graphs);
    println!("classes        {}", s.num_classes);
    println!("class counts   {:?}", s.class_counts);
    println!("class labels   {:?}", ds.raw_labels);
    println!("mean nodes     {:.2}", s.mean_nodes);
    println!("mean edges     {:.2}", s.mean_edges);
    println!("max nodes      {}", s.max_nodes);
    println!("edgeless       {}", s.edgeless_graphs);
    Ok(())
}
