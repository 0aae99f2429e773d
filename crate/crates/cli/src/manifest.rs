//! Run configuration shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use vsgraph_core::eval::CvConfig;
use vsgraph_core::seed::streams;
use vsgraph_core::{AggregationMode, EncoderConfig, ModelKind, SeedSpec};

pub const DATA_ROOT_ENV: &str = "VSGRAPH_DATA_ROOT";
pub const DEFAULT_DATA_ROOT: &str = "data";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    /// Dataset name under the data root, or a directory path.
    pub dataset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_root: Option<PathBuf>,
    pub models: Vec<ModelKind>,
    pub dim: usize,
    pub dims: Vec<usize>,
    pub hops: usize,
    pub layers: usize,
    pub alpha: f64,
    pub aggregation: AggregationMode,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub workers: usize,
    pub warmup: bool,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PathBuf>,
}

impl Default for RunManifest {
    fn default() -> Self {
        let cv = CvConfig::default();
        let enc = cv.encoder;
        Self {
            dataset: "MUTAG".into(),
            data_root: None,
            models: vec![ModelKind::VsGraph],
            dim: enc.dim,
            dims: cv.dims,
            hops: enc.hops,
            layers: enc.layers,
            alpha: enc.alpha,
            aggregation: enc.aggregation,
            folds: cv.folds,
            repeats: cv.repeats,
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            warmup: cv.warmup,
            out_dir: PathBuf::from("results"),
            model_file: None,
            predictions: None,
        }
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("{}", e.message()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes to TOML")
    }

    pub fn encoder(&self, seed: SeedSpec) -> EncoderConfig {
        EncoderConfig {
            dim: self.dim,
            hops: self.hops,
            layers: self.layers,
            alpha: self.alpha,
            seed,
            aggregation: self.aggregation,
        }
    }

    /// Basis seed for models trained on a whole dataset.
    pub fn train_seed(&self) -> SeedSpec {
        SeedSpec::new(self.seed, streams::BASIS)
    }

    pub fn cv_config(&self, model: ModelKind) -> CvConfig {
        CvConfig {
            folds: self.folds,
            repeats: self.repeats,
            seed: self.seed,
            model,
            encoder: self.encoder(self.train_seed()),
            dims: self.dims.clone(),
            workers: self.workers,
            warmup: self.warmup,
        }
    }

    pub fn single_model(&self) -> Result<ModelKind> {
        match self.models.as_slice() {
            [m] => Ok(*m),
            other => bail!("this command takes exactly one model, got {}", other.len()),
        }
    }

    /// Directory holding the dataset files and the dataset name.
    ///
    /// An existing directory is used as is and named after its last
    /// component; anything else is looked up under the data root.
    pub fn dataset_location(&self) -> (PathBuf, String) {
        let given = Path::new(&self.dataset);
        if given.is_dir() {
            let name = given
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.dataset.clone());
            return (given.to_owned(), name);
        }
        let root = self
            .data_root
            .clone()
            .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_ROOT));
        (root.join(&self.dataset), self.dataset.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            bail!("no model selected");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if self.dims.contains(&0) {
            bail!("dimensions must be positive");
        }
        self.encoder(self.train_seed()).validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip() {
        let mut m = RunManifest {
            models: vec![ModelKind::VsGraph, ModelKind::GraphHd],
            aggregation: AggregationMode::BinarizeOr,
            model_file: Some("m.vsgm".into()),
            ..RunManifest::default()
        };
        m.alpha = 0.7;
        assert_eq!(RunManifest::from_toml(&m.to_toml()).unwrap(), m);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let m = RunManifest::from_toml("dim = 256\nmodels = [\"graphhd\"]\n").unwrap();
        assert_eq!(m.dim, 256);
        assert_eq!(m.models, vec![ModelKind::GraphHd]);
        assert_eq!(m.folds, RunManifest::default().folds);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunManifest::from_toml("dimm = 3\n").is_err());
    }
}
