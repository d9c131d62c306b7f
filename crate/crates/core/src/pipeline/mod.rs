//! Gated three-layer detector `f = f₃ ∘ f₂ ∘ f₁`.

mod gating;
mod objective;
mod training;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gating::{
    assemble_pipeline, classify, classify_with_l2_tick, run_pipeline, severity_index, trace_id, DetectionOutcome, L1Info,
    L2Info, L3Info, Pipeline, PipelineSummary, Severity, Stage,
};
pub use objective::{composite_objective, depth_proxy, layer_loss, measure_latencies, CompositeObjective, DEPTH_CAP};
pub use training::{layer_dataset, train_layer, train_pipeline_models, LayerModels, LayerSpec};

use crate::classical::{Classifier, MlError};
use crate::hybrid::HybridError;
use crate::telemetry::TelemetryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("layer {layer} head has {actual} classes, expected {expected}")]
    ArityMismatch { layer: u8, expected: usize, actual: usize },
    #[error("threshold {name} = {value} outside [0, 1]")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("weight {name} = {value} is negative")]
    NegativeWeight { name: &'static str, value: f64 },
    #[error("model: {0}")]
    Model(String),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
}

impl From<MlError> for PipelineError {
    fn from(e: MlError) -> Self {
        PipelineError::Model(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Anything that maps a layer view to a class distribution.
pub trait LayerModel: Send + Sync {
    fn n_classes(&self) -> usize;
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl<T: Classifier + Send + Sync> LayerModel for T {
    fn n_classes(&self) -> usize {
        Classifier::n_classes(self)
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(Classifier::predict_proba(self, x)?)
    }
}

/// Returns the same distribution for every input.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantModel(pub Vec<f64>);

impl LayerModel for ConstantModel {
    fn n_classes(&self) -> usize {
        self.0.len()
    }

    fn predict_proba(&self, _x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub tau1: f64,
    pub tau2: f64,
    pub max_l1_to_l2_delay: u64,
    /// Latency weights for layers 1–3.
    pub lambda_latency: [f64; 3],
    pub lambda_interpretability: f64,
    pub model_version: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tau1: 0.5,
            tau2: 0.5,
            max_l1_to_l2_delay: 100,
            lambda_latency: [0.0; 3],
            lambda_interpretability: 0.0,
            model_version: "1".into(),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
