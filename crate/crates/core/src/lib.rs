//! Hierarchical quantum-augmented threat detection for O-RAN telemetry.

pub mod quantum;
pub mod train;
pub mod classical;
pub mod telemetry;
pub mod hybrid;
pub mod pipeline;
pub mod cli;
