//! Command-line front end: experiment configs, run directories and exit codes.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{run, LayerModelFile, LAYER_MODEL_FORMAT, METRICS_SCHEMA};
pub use config::{DataSource, ExperimentConfig, HeadKind, RawConfig};

use crate::classical::MlError;
use crate::hybrid::HybridError;
use crate::pipeline::PipelineError;
use crate::quantum::QuantumError;
use crate::telemetry::TelemetryError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<TelemetryError> for CliError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::InvalidSpec(_) | TelemetryError::InvalidLayer(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<MlError> for CliError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::InvalidConfig(_) => CliError::Config(e.to_string()),
            MlError::Format(_) | MlError::EmptyDataset | MlError::ShapeMismatch { .. } | MlError::LabelOutOfRange { .. } => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<HybridError> for CliError {
    fn from(e: HybridError) -> Self {
        match e {
            HybridError::UnsupportedKind(_) => CliError::Config(e.to_string()),
            HybridError::ShapeMismatch { .. } => CliError::Data(e.to_string()),
            HybridError::Quantum(q) => q.into(),
            HybridError::Ml(m) => m.into(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::InvalidThreshold { .. } | PipelineError::NegativeWeight { .. } => CliError::Config(e.to_string()),
            PipelineError::ArityMismatch { .. } => CliError::Data(e.to_string()),
            PipelineError::Telemetry(t) => t.into(),
            PipelineError::Hybrid(h) => h.into(),
            PipelineError::OutOfRange(_) | PipelineError::Model(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hqdetect", version, about = "Hierarchical quantum-augmented threat detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic telemetry CSV.
    Gen(CommonArgs),
    /// Train and evaluate every configured layer/encoding/composition/head cell.
    TrainEval(CommonArgs),
    /// Run the gated three-layer pipeline on the held-out split.
    Pipeline(PipelineArgs),
    /// Write encoder features for every sample as CSV.
    ExportLatent(ExportArgs),
    /// Print copy and measurement counts for an estimation budget.
    Resources(ResourceArgs),
}

/// Flags override keys of the same name in `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Comma list of layer targets (1, 2, 3).
    #[arg(long)]
    pub layer: Option<String>,
    /// Comma list: none, partial, full, amplitude3..amplitude6.
    #[arg(long)]
    pub encoding: Option<String>,
    /// Comma list: rf, mlp.
    #[arg(long)]
    pub head: Option<String>,
    /// Comma list: serial, parallel.
    #[arg(long)]
    pub composition: Option<String>,
    /// Training fraction.
    #[arg(long)]
    pub split: Option<String>,
    /// Read data from this CSV instead of generating it.
    #[arg(long)]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub l1_model: Option<String>,
    #[arg(long)]
    pub l2_model: Option<String>,
    #[arg(long)]
    pub l3_model: Option<String>,
    #[arg(long)]
    pub tau1: Option<String>,
    #[arg(long)]
    pub tau2: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ResourceArgs {
    #[arg(long)]
    pub n_proj: u64,
    /// Comma list of measurement counts; omit for none.
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<u64>,
    /// Comma list of subsystem dimensions, same length as `--m`.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Layer model file whose encoder is used; otherwise one is built from the config.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output CSV path; defaults to the run directory.
    #[arg(long)]
    pub to: Option<PathBuf>,
}

impl CommonArgs {
    pub fn raw_config(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                RawConfig::parse(&text)?
            }
            None => RawConfig::default(),
        };
        let overrides = [
            ("out", &self.out),
            ("seed", &self.seed),
            ("n", &self.n),
            ("layers", &self.layer),
            ("encodings", &self.encoding),
            ("heads", &self.head),
            ("compositions", &self.composition),
            ("split", &self.split),
            ("csv_path", &self.csv),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        if self.csv.is_some() {
            raw.set("source", "csv")?;
        }
        Ok(raw)
    }
}

/// Builds the global rayon pool from `HQDETECT_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("HQDETECT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("HQDETECT_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}
