//! Training calculus for parameterized circuits and channel networks.

pub mod commutator;
pub mod cost;
pub mod gradient;

use thiserror::Error;

use crate::quantum::QuantumError;

pub use commutator::{
    apply_unitary_update, commutator_update_matrices, train_commutator, TrainConfig, TrainReport, TunableUnitary,
    UnitaryLayer, UnitaryNetwork, UpdateMatrix,
};
pub use cost::{fidelity_cost, CostMode, FidelityCostConfig, TargetProjector};
pub use gradient::{
    adjoint_backprop_grad, finite_difference_grad, parameter_shift_grad, ChannelLayer, ChannelNetwork,
    GradientMethod, GradientVector, DEFAULT_FD_STEP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("parameter {index} is not a Pauli-generated rotation")]
    UnsupportedGate { index: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("{what}: expected {expected}, got {actual}")]
    LengthMismatch { what: &'static str, expected: usize, actual: usize },
    #[error("update matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, TrainError>;
