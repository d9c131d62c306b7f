use serde::{Deserialize, Serialize};

use super::density::DensityOperator;
use super::error::{QuantumError, Result};
use super::linalg::{self, CMatrix};
use super::state::QuantumState;

pub const OBSERVABLE_TOLERANCE: f64 = 1e-12;
/// Imaginary residue tolerated in an expectation value before it is discarded.
pub const EXPECTATION_IMAG_TOLERANCE: f64 = 1e-10;

/// Hermitian measurement operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    matrix: CMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let defect = linalg::hermitian_defect(&matrix);
        if defect > OBSERVABLE_TOLERANCE || !matrix.nrows().is_power_of_two() {
            return Err(QuantumError::NotHermitian { defect });
        }
        Ok(Self { matrix, label: label.into() })
    }

    pub(crate) fn from_raw(matrix: CMatrix, label: impl Into<String>) -> Self {
        Self { matrix, label: label.into() }
    }

    pub fn identity(qubits: usize) -> Self {
        Self::from_raw(linalg::identity(1 << qubits), "I")
    }

    /// `Z` on `qubit` of an `n`-qubit register.
    pub fn z(qubit: usize, n: usize) -> Result<Self> {
        if qubit >= n {
            return Err(QuantumError::InvalidIndices { indices: vec![qubit], qubits: n });
        }
        Ok(Self::from_raw(linalg::embed(&linalg::pauli_z(), &[qubit], n), format!("Z{qubit}")))
    }

    /// `Z⊗Z` on qubits `a`, `b`.
    pub fn zz(a: usize, b: usize, n: usize) -> Result<Self> {
        if a >= n || b >= n || a == b {
            return Err(QuantumError::InvalidIndices { indices: vec![a, b], qubits: n });
        }
        let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
        Ok(Self::from_raw(linalg::embed(&zz, &[a, b], n), format!("Z{a}Z{b}")))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix).into_iter().map(f64::abs).fold(0.0, f64::max)
    }
}

/// Anything an observable can be measured on.
pub trait Measurable {
    fn expectation_of(&self, obs: &Observable) -> Result<f64>;
}

fn real_part(v: num_complex::Complex64) -> f64 {
    debug_assert!(v.im.abs() <= EXPECTATION_IMAG_TOLERANCE, "expectation has imaginary part {}", v.im);
    v.re
}

impl Measurable for QuantumState {
    fn expectation_of(&self, obs: &Observable) -> Result<f64> {
        if obs.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.dim(), actual: obs.dim() });
        }
        let amps = self.amplitudes();
        let m = obs.matrix();
        let mut acc = linalg::ZERO;
        for (i, ai) in amps.iter().enumerate() {
            let mut row = linalg::ZERO;
            for (j, aj) in amps.iter().enumerate() {
                row += m[(i, j)] * aj;
            }
            acc += ai.conj() * row;
        }
        Ok(real_part(acc))
    }
}

impl Measurable for DensityOperator {
    fn expectation_of(&self, obs: &Observable) -> Result<f64> {
        if obs.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.dim(), actual: obs.dim() });
        }
        Ok(real_part(linalg::trace_product(obs.matrix(), self.matrix())))
    }
}

/// `Tr(M ρ)` for a pure or mixed state.
pub fn expectation<S: Measurable + ?Sized>(state: &S, obs: &Observable) -> Result<f64> {
    state.expectation_of(obs)
}
