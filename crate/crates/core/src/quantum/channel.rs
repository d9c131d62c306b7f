//! Stinespring-form CPTP maps `𝓔(X) = Tr_anc(U[X⊗|0⟩⟨0|]U†)` and their
//! Heisenberg-picture adjoints.
//!
//! The system register occupies the leading qubits; ancillas follow and start
//! in `|0…0⟩`.

use serde::{Deserialize, Serialize};

use super::density::{partial_trace_matrix, DensityOperator};
use super::error::{QuantumError, Result};
use super::linalg::{self, CMatrix};
use super::observable::Observable;

pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    unitary: CMatrix,
    system_qubits: usize,
    ancilla_qubits: usize,
}

impl QuantumChannel {
    pub fn new(unitary: CMatrix, system_qubits: usize, ancilla_qubits: usize) -> Result<Self> {
        let dim = 1usize << (system_qubits + ancilla_qubits);
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(QuantumError::DimensionMismatch { expected: dim, actual: unitary.nrows() });
        }
        let defect = linalg::unitary_defect(&unitary);
        if defect > UNITARY_TOLERANCE {
            return Err(QuantumError::NotUnitary { defect });
        }
        Ok(Self { unitary, system_qubits, ancilla_qubits })
    }

    pub fn identity(system_qubits: usize) -> Self {
        Self { unitary: linalg::identity(1 << system_qubits), system_qubits, ancilla_qubits: 0 }
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn system_qubits(&self) -> usize {
        self.system_qubits
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    fn total_qubits(&self) -> usize {
        self.system_qubits + self.ancilla_qubits
    }

    fn check_system_dim(&self, dim: usize) -> Result<()> {
        let expected = 1usize << self.system_qubits;
        if dim != expected {
            return Err(QuantumError::DimensionMismatch { expected, actual: dim });
        }
        Ok(())
    }

    /// `X ⊗ |0…0⟩⟨0…0|` on the joint register.
    pub fn dilate(&self, x: &CMatrix) -> CMatrix {
        let a = 1usize << self.ancilla_qubits;
        let n = x.nrows();
        let mut out = CMatrix::zeros(n * a, n * a);
        for i in 0..n {
            for j in 0..n {
                out[(i * a, j * a)] = x[(i, j)];
            }
        }
        out
    }

    /// Trace out the ancillas of a joint-register operator.
    pub fn trace_ancilla(&self, joint: &CMatrix) -> CMatrix {
        if self.ancilla_qubits == 0 {
            return joint.clone();
        }
        let keep: Vec<usize> = (0..self.system_qubits).collect();
        partial_trace_matrix(joint, self.total_qubits(), &keep).expect("system register indices are valid")
    }

    /// `⟨0|_anc Y |0⟩_anc`: the system block of a joint operator with the
    /// ancillas projected onto their initial state.
    pub fn project_ancilla(&self, joint: &CMatrix) -> CMatrix {
        let a = 1usize << self.ancilla_qubits;
        let n = 1usize << self.system_qubits;
        CMatrix::from_fn(n, n, |i, j| joint[(i * a, j * a)])
    }

    /// Apply the map to an arbitrary system operator (linear extension).
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_system_dim(x.nrows())?;
        let joint = &self.unitary * self.dilate(x) * self.unitary.adjoint();
        Ok(self.trace_ancilla(&joint))
    }

    /// Heisenberg-picture map on an arbitrary system operator.
    pub fn adjoint_apply_matrix(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_system_dim(a.nrows())?;
        let lifted = linalg::kron(a, &linalg::identity(1 << self.ancilla_qubits));
        let joint = self.unitary.adjoint() * lifted * &self.unitary;
        Ok(self.project_ancilla(&joint))
    }

    /// Sequential composition: `next ∘ self`. The composite's ancillas are
    /// this channel's followed by `next`'s.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if next.system_qubits != self.system_qubits {
            return Err(QuantumError::DimensionMismatch { expected: self.system_qubits, actual: next.system_qubits });
        }
        let s = self.system_qubits;
        let a1 = self.ancilla_qubits;
        let a2 = next.ancilla_qubits;
        let n = s + a1 + a2;
        let first = linalg::kron(&self.unitary, &linalg::identity(1 << a2));
        let targets: Vec<usize> = (0..s).chain(s + a1..n).collect();
        let second = linalg::embed(&next.unitary, &targets, n);
        Ok(QuantumChannel { unitary: second * first, system_qubits: s, ancilla_qubits: a1 + a2 })
    }
}

/// `𝓔(X)`.
pub fn channel_apply(ch: &QuantumChannel, x: &DensityOperator) -> Result<DensityOperator> {
    Ok(DensityOperator::from_raw(ch.apply_matrix(x.matrix())?))
}

/// `𝓔†(A)`, satisfying `Tr(A·𝓔(B)) = Tr(𝓔†(A)·B)`.
pub fn channel_adjoint_apply(ch: &QuantumChannel, a: &Observable) -> Result<Observable> {
    let m = ch.adjoint_apply_matrix(a.matrix())?;
    Ok(Observable::from_raw(linalg::hermitize(&m), format!("E†({})", a.label())))
}
