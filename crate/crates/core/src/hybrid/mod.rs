//! Quantum feature extraction feeding a classical head.

mod encoder;
mod model;

use thiserror::Error;

pub use encoder::{build_encoder, extract_features, Encoder, EncodingConfig, EncodingKind, ObservableSet, AMPLITUDE_DEPTHS};
pub use model::{
    composed_features, head_width, predict_hybrid, train_hybrid, Composition, Head, HeadConfig, HybridConfig,
    HybridModel,
};

use crate::classical::MlError;
use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error("unsupported kind {0:?}")]
    UnsupportedKind(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

pub type Result<T> = std::result::Result<T, HybridError>;
