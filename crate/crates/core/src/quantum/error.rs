use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("input vector is empty")]
    EmptyInput,
    #[error("input vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("value {value} at index {index} is outside [{lo}, {hi}]")]
    OutOfRange { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid qubit indices {indices:?} for a {qubits}-qubit register")]
    InvalidIndices { indices: Vec<usize>, qubits: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("not a valid density operator: {reason}")]
    InvalidDensity { reason: String },
    #[error("amplitude vector length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },
    #[error("list lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("integer overflow while evaluating {what}")]
    Overflow { what: &'static str },
}

pub type Result<T> = std::result::Result<T, QuantumError>;
