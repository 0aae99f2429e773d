mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use vsgraph_core::{AggregationMode, ModelKind};

use crate::manifest::RunManifest;

/// Training-free graph classification with binary hypervectors.
///
/// Settings resolve in this order, later wins: built-in defaults, the model
/// sidecar (predict only), the `--config` file, command-line flags. The
/// dataset root falls back to `$VSGRAPH_DATA_ROOT`, then `./data`.
#[derive(Parser)]
#[command(name = "vsgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated stratified k-fold cross-validation at one dimension.
    Cv(RunArgs),
    /// Cross-validation at every dimension in `--dims`.
    Sweep(RunArgs),
    /// Fit on a whole dataset and save the model.
    Train(RunArgs),
    /// Classify a dataset with a saved model.
    Predict(RunArgs),
    /// Parse a dataset and print its statistics.
    ValidateDataset(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML manifest; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset name under the data root, or a dataset directory.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Comma-separated: vsgraph, graphhd.
    #[arg(long = "model", value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated dimensions for `sweep`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Spike diffusion hops K.
    #[arg(long)]
    hops: Option<usize>,
    /// Message passing layers L.
    #[arg(long)]
    layers: Option<usize>,
    /// Residual blend weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// max or binarize-or.
    #[arg(long)]
    aggregation: Option<AggregationMode>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Encoding threads; defaults to available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the untimed warm-up fold.
    #[arg(long)]
    no_warmup: bool,
    /// Directory for reports.
    #[arg(long = "out")]
    out_dir: Option<PathBuf>,
    /// Model file written by `train` and read by `predict`.
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Prediction CSV written by `predict`.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, base: RunManifest) -> Result<RunManifest> {
        let mut m = match &self.config {
            Some(path) => RunManifest::load(path)?,
            None => base,
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    m.$field = v.clone();
                }
            )*};
        }
        set!(dataset, models, dim, dims, hops, layers, alpha, aggregation);
        set!(folds, repeats, seed, workers, out_dir);
        if self.data_root.is_some() {
            m.data_root = self.data_root.clone();
        }
        if self.model_file.is_some() {
            m.model_file = self.model_file.clone();
        }
        if self.predictions.is_some() {
            m.predictions = self.predictions.clone();
        }
        if self.no_warmup {
            m.warmup = false;
        }
        m.validate()?;
        Ok(m)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cv(args) => commands::cv(&args.resolve(RunManifest::default())?),
        Command::Sweep(args) => commands::sweep(&args.resolve(RunManifest::default())?),
        Command::Train(args) => commands::train(&args.resolve(RunManifest::default())?),
        Command::Predict(args) => {
            let base = match (&args.config, &args.model_file) {
                (None, Some(path)) => commands::sidecar_manifest(path)?,
                _ => None,
            };
            commands::predict(&args.resolve(base.unwrap_or_default())?)
        }
        Command::ValidateDataset(args) => {
            commands::validate_dataset(&args.resolve(RunManifest::default())?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("vsgraph: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
