//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key may appear
//! at most once; list values are comma-separated. See the README for the key list.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use super::CliError;
use crate::classical::{MlpConfig, RandomForestConfig};
use crate::hybrid::{Composition, EncodingKind, HeadConfig};
use crate::pipeline::{LayerSpec, PipelineConfig};
use crate::telemetry::{CsvSchema, GeneratorSpec, Normalization, UnauthorizedAccessMode, CLASS_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HeadKind {
    Rf,
    Mlp,
}

impl HeadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HeadKind::Rf => "rf",
            HeadKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Generate(GeneratorSpec),
    Csv { path: PathBuf, schema: CsvSchema, normalization: Normalization },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub layers: Vec<u8>,
    pub encodings: Vec<EncodingKind>,
    pub compositions: Vec<Composition>,
    pub heads: Vec<HeadKind>,
    pub split: f64,
    pub split_seed: u64,
    pub seed: u64,
    pub pqc_training: bool,
    pub rf: RandomForestConfig,
    pub mlp: MlpConfig,
    pub pipeline: PipelineConfig,
    pub models: [Option<PathBuf>; 3],
    pub out: PathBuf,
}

const KEYS: &[&str] = &[
    "source", "n", "seed", "delta", "sigma", "rho", "proportions", "unauthorized_access", "csv_path", "csv_schema",
    "normalize", "layers", "encodings", "compositions", "heads", "split", "split_seed", "pqc_training", "rf_trees",
    "rf_depth", "mlp_hidden", "mlp_epochs", "mlp_lr", "mlp_batch", "tau1", "tau2", "max_delay", "lambda1", "lambda2",
    "lambda3", "lambda4", "model_version", "l1_model", "l2_model", "l3_model", "out",
];

/// Raw key/value pairs with the line each came from (0 for command-line overrides).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

fn config_err(line: usize, message: impl Into<String>) -> CliError {
    let message = message.into();
    CliError::Config(if line == 0 { message } else { format!("line {line}: {message}") })
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) =
                trimmed.split_once('=').ok_or_else(|| config_err(line_no, format!("expected `key = value`, got {trimmed:?}")))?;
            let key = key.trim();
            if raw.entries.contains_key(key) {
                return Err(config_err(line_no, format!("duplicate key {key:?}")));
            }
            raw.insert(key, value.trim(), line_no)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(config_err(line, format!("unknown key {key:?}")));
        }
        self.entries.insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    /// Command-line values replace file values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        self.insert(key, value, 0)
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| config_err(line, format!("{key}: cannot parse {v:?}"))),
        }
    }

    fn list_or<T, F>(&self, key: &str, default: Vec<T>, parse: F) -> Result<Vec<T>, CliError>
    where
        F: Fn(&str) -> Option<T>,
    {
        match self.get(key) {
            None => Ok(default),
            Some((v, line)) => {
                let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                items.iter().map(|s| parse(s).ok_or_else(|| config_err(line, format!("{key}: bad item {s:?}")))).collect()
            }
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.get(key).map_or(0, |(_, l)| l)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let seed = self.parse_or("seed", 0u64)?;
        let source = match self.get("source").map_or("generate", |(v, _)| v) {
            "generate" => {
                let defaults = GeneratorSpec::default();
                let proportions = match self.get("proportions") {
                    None => defaults.proportions,
                    Some((v, line)) => {
                        let p: Vec<f64> = self.list_or("proportions", vec![], |s| s.parse().ok())?;
                        p.try_into().map_err(|_| config_err(line, format!("proportions needs {CLASS_COUNT} values, got {v:?}")))?
                    }
                };
                let unauthorized_access = match self.get("unauthorized_access").map_or("binary", |(v, _)| v) {
                    "binary" => UnauthorizedAccessMode::Binary,
                    "rate" => UnauthorizedAccessMode::Rate,
                    other => return Err(config_err(self.line_of("unauthorized_access"), format!("unauthorized_access: {other:?}"))),
                };
                DataSource::Generate(GeneratorSpec {
                    n_samples: self.parse_or("n", defaults.n_samples)?,
                    proportions,
                    seed,
                    delta: self.parse_or("delta", defaults.delta)?,
                    sigma: self.parse_or("sigma", defaults.sigma)?,
                    rho: self.parse_or("rho", defaults.rho)?,
                    unauthorized_access,
                })
            }
            "csv" => {
                let (path, _) = self.get("csv_path").ok_or_else(|| config_err(self.line_of("source"), "csv source needs csv_path"))?;
                let schema = match self.get("csv_schema").map_or("master", |(v, _)| v) {
                    "master" => CsvSchema::Master,
                    "layer1" => CsvSchema::Layer(1),
                    "layer2" => CsvSchema::Layer(2),
                    "layer3" => CsvSchema::Layer(3),
                    "anomaly" => CsvSchema::AnomalyBinary,
                    other => return Err(config_err(self.line_of("csv_schema"), format!("csv_schema: {other:?}"))),
                };
                let normalization = match self.get("normalize").map_or("minmax", |(v, _)| v) {
                    "minmax" => Normalization::MinMax,
                    "none" => Normalization::None,
                    other => return Err(config_err(self.line_of("normalize"), format!("normalize: {other:?}"))),
                };
                DataSource::Csv { path: PathBuf::from(path), schema, normalization }
            }
            other => return Err(config_err(self.line_of("source"), format!("source must be generate or csv, got {other:?}"))),
        };

        let layers = self.list_or("layers", vec![3], |s| s.parse::<u8>().ok().filter(|l| (1..=3).contains(l)))?;
        if layers.is_empty() {
            return Err(config_err(self.line_of("layers"), "at least one layer target is required"));
        }
        let encodings = self.list_or("encodings", vec![EncodingKind::None], |s| s.parse().ok())?;
        let compositions = self.list_or("compositions", vec![Composition::Serial], |s| s.parse().ok())?;
        let heads = self.list_or("heads", vec![HeadKind::Rf], |s| match s {
            "rf" => Some(HeadKind::Rf),
            "mlp" => Some(HeadKind::Mlp),
            _ => None,
        })?;
        for (key, empty) in [("encodings", encodings.is_empty()), ("compositions", compositions.is_empty()), ("heads", heads.is_empty())] {
            if empty {
                return Err(config_err(self.line_of(key), format!("{key} must not be empty")));
            }
        }
        let split = self.parse_or("split", 0.7)?;
        if !(split > 0.0 && split < 1.0) {
            return Err(config_err(self.line_of("split"), format!("split must lie in (0, 1), got {split}")));
        }

        let rf_defaults = RandomForestConfig::default();
        let rf = RandomForestConfig {
            tree_count: self.parse_or("rf_trees", rf_defaults.tree_count)?,
            max_depth: self.parse_or("rf_depth", rf_defaults.max_depth)?,
            ..rf_defaults
        };
        if rf.tree_count == 0 {
            return Err(config_err(self.line_of("rf_trees"), "rf_trees must be at least 1"));
        }
        let mlp_defaults = MlpConfig::default();
        let mlp = MlpConfig {
            hidden: self.list_or("mlp_hidden", mlp_defaults.hidden.clone(), |s| s.parse().ok().filter(|&h: &usize| h > 0))?,
            epochs: self.parse_or("mlp_epochs", mlp_defaults.epochs)?,
            learning_rate: self.parse_or("mlp_lr", mlp_defaults.learning_rate)?,
            batch_size: self.parse_or("mlp_batch", mlp_defaults.batch_size)?,
            ..mlp_defaults
        };

        let pd = PipelineConfig::default();
        let pipeline = PipelineConfig {
            tau1: self.parse_or("tau1", pd.tau1)?,
            tau2: self.parse_or("tau2", pd.tau2)?,
            max_l1_to_l2_delay: self.parse_or("max_delay", pd.max_l1_to_l2_delay)?,
            lambda_latency: [
                self.parse_or("lambda1", 0.0)?,
                self.parse_or("lambda2", 0.0)?,
                self.parse_or("lambda3", 0.0)?,
            ],
            lambda_interpretability: self.parse_or("lambda4", 0.0)?,
            model_version: self.get("model_version").map_or(pd.model_version, |(v, _)| v.to_string()),
        };
        let model = |k: &str| self.get(k).map(|(v, _)| PathBuf::from(v));

        Ok(ExperimentConfig {
            source,
            layers,
            encodings,
            compositions,
            heads,
            split,
            split_seed: self.parse_or("split_seed", seed)?,
            seed,
            pqc_training: self.parse_or("pqc_training", false)?,
            rf,
            mlp,
            pipeline,
            models: [model("l1_model"), model("l2_model"), model("l3_model")],
            out: PathBuf::from(self.get("out").map_or("runs", |(v, _)| v)),
        })
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Every resolved setting except `out` as sorted `key = value` lines.
    pub fn canonical(&self) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        match &self.source {
            DataSource::Generate(g) => {
                m.insert("source", "generate".into());
                m.insert("n", g.n_samples.to_string());
                m.insert("delta", format!("{:?}", g.delta));
                m.insert("sigma", format!("{:?}", g.sigma));
                m.insert("rho", format!("{:?}", g.rho));
                m.insert("proportions", g.proportions.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(","));
                m.insert("unauthorized_access", format!("{:?}", g.unauthorized_access).to_lowercase());
            }
            DataSource::Csv { path, schema, normalization } => {
                m.insert("source", "csv".into());
                m.insert("csv_path", path.display().to_string());
                m.insert("csv_schema", format!("{schema:?}"));
                m.insert("normalize", format!("{normalization:?}"));
            }
        }
        m.insert("seed", self.seed.to_string());
        m.insert("layers", join(&self.layers));
        m.insert("encodings", join(&self.encodings));
        m.insert("compositions", join(&self.compositions));
        m.insert("heads", self.heads.iter().map(|h| h.as_str()).collect::<Vec<_>>().join(","));
        m.insert("split", format!("{:?}", self.split));
        m.insert("split_seed", self.split_seed.to_string());
        m.insert("pqc_training", self.pqc_training.to_string());
        m.insert("rf_trees", self.rf.tree_count.to_string());
        m.insert("rf_depth", self.rf.max_depth.to_string());
        m.insert("mlp_hidden", join(&self.mlp.hidden));
        m.insert("mlp_epochs", self.mlp.epochs.to_string());
        m.insert("mlp_lr", format!("{:?}", self.mlp.learning_rate));
        m.insert("mlp_batch", self.mlp.batch_size.to_string());
        let p = &self.pipeline;
        m.insert("tau1", format!("{:?}", p.tau1));
        m.insert("tau2", format!("{:?}", p.tau2));
        m.insert("max_delay", p.max_l1_to_l2_delay.to_string());
        for (i, l) in p.lambda_latency.iter().enumerate() {
            m.insert(["lambda1", "lambda2", "lambda3"][i], format!("{l:?}"));
        }
        m.insert("lambda4", format!("{:?}", p.lambda_interpretability));
        m.insert("model_version", p.model_version.clone());
        for (i, path) in self.models.iter().enumerate() {
            if let Some(path) = path {
                m.insert(["l1_model", "l2_model", "l3_model"][i], path.display().to_string());
            }
        }
        m.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of SHA-256 over [`canonical`](Self::canonical).
    pub fn run_id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn layer_spec(&self, encoding: EncodingKind, composition: Composition, head: HeadKind) -> LayerSpec {
        let head = match head {
            HeadKind::Rf => HeadConfig::Forest(self.rf.clone()),
            HeadKind::Mlp => HeadConfig::Mlp(self.mlp.clone()),
        };
        LayerSpec { encoding, composition, head, pqc_training: self.pqc_training, seed: self.seed }
    }
}
