//! From-scratch classical heads and confusion-matrix metrics.

pub mod forest;
pub mod metrics;
pub mod mlp;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

pub use forest::{predict_rf, train_rf, DecisionTree, RandomForestConfig, RandomForestModel};
pub use metrics::{confusion_matrix, metrics_from_cm, roc_auc, ClassMetrics, ConfusionMatrix, MetricsReport};
pub use mlp::{predict_mlp, train_mlp, MlpConfig, MlpModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlError {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("confusion matrix has no samples")]
    EmptyMatrix,
    #[error("need at least one positive and one negative label")]
    DegenerateLabels,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, MlError>;

/// Probabilistic classifier over a fixed number of classes.
pub trait Classifier {
    fn n_classes(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>>;
}

pub(crate) fn check_dataset(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(MlError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let width = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != width) {
        return Err(MlError::ShapeMismatch { expected: width, actual: row.len() });
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(MlError::LabelOutOfRange { label, n_classes });
    }
    Ok(width)
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Versioned JSON envelope for persisted models.
#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    model: T,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub(crate) fn to_versioned_json<T: Serialize>(format: &str, model: &T) -> Result<String> {
    let env = Envelope { format: format.to_string(), version: MODEL_FORMAT_VERSION, model };
    serde_json::to_string_pretty(&env).map_err(|e| MlError::Format(e.to_string()))
}

pub(crate) fn from_versioned_json<T: DeserializeOwned>(format: &str, text: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(text).map_err(|e| MlError::Format(e.to_string()))?;
    if env.format != format {
        return Err(MlError::Format(format!("expected format {format:?}, found {:?}", env.format)));
    }
    if env.version != MODEL_FORMAT_VERSION {
        return Err(MlError::Format(format!("unsupported version {}", env.version)));
    }
    Ok(env.model)
}
