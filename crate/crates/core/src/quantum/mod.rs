//! Dense simulation of pure and mixed qubit states, parameterized circuits,
//! Stinespring channels and measurement estimators.

pub mod channel;
pub mod circuit;
pub mod density;
pub mod error;
pub mod estimators;
pub mod gate;
pub mod linalg;
pub mod observable;
pub mod random;
pub mod state;

pub use channel::{channel_adjoint_apply, channel_apply, QuantumChannel};
pub use circuit::{apply_circuit, EntanglerGate, ParameterizedCircuit, Topology};
pub use density::{partial_trace, swap_trick_purity, DensityOperator};
pub use error::QuantumError;
pub use estimators::{projection_noise_bound, resource_counts, ResourceEstimate};
pub use gate::{Gate, GateKind};
pub use linalg::CMatrix;
pub use observable::{expectation, Measurable, Observable};
pub use state::{amplitude_encode, product_encode, product_encode_folded, QuantumState};
