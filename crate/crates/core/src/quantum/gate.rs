use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::error::{QuantumError, Result};
use super::linalg::{self, CMatrix, ONE, ZERO};
use super::state::{ry_matrix, rz_matrix};

pub const GENERATOR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// `exp(−iθY/2)`.
    RotationY,
    /// `exp(−iθZ/2)`.
    RotationZ,
    Cnot,
    Cz,
    /// Toffoli; the last target is flipped when the first two are set.
    Ccx,
    Swap,
    /// A fixed (non-trainable) unitary on the targets.
    FixedUnitary(CMatrix),
    /// `exp(−iθH)` for an arbitrary Hermitian generator `H`.
    Generated(CMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub parameter: Option<f64>,
}

fn arity_error(targets: &[usize], qubits: usize) -> QuantumError {
    QuantumError::InvalidIndices { indices: targets.to_vec(), qubits }
}

impl Gate {
    pub fn ry(qubit: usize, theta: f64) -> Self {
        Self { kind: GateKind::RotationY, targets: vec![qubit], parameter: Some(theta) }
    }

    pub fn rz(qubit: usize, theta: f64) -> Self {
        Self { kind: GateKind::RotationZ, targets: vec![qubit], parameter: Some(theta) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, targets: vec![control, target], parameter: None }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self { kind: GateKind::Cz, targets: vec![a, b], parameter: None }
    }

    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Self { kind: GateKind::Ccx, targets: vec![c0, c1, target], parameter: None }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self { kind: GateKind::Swap, targets: vec![a, b], parameter: None }
    }

    pub fn fixed(matrix: CMatrix, targets: Vec<usize>) -> Result<Self> {
        let defect = linalg::unitary_defect(&matrix);
        if defect > 1e-10 {
            return Err(QuantumError::NotUnitary { defect });
        }
        if matrix.nrows() != 1 << targets.len() {
            return Err(QuantumError::DimensionMismatch { expected: 1 << targets.len(), actual: matrix.nrows() });
        }
        Ok(Self { kind: GateKind::FixedUnitary(matrix), targets, parameter: None })
    }

    pub fn generated(generator: CMatrix, targets: Vec<usize>, theta: f64) -> Result<Self> {
        let defect = linalg::hermitian_defect(&generator);
        if defect > GENERATOR_TOLERANCE {
            return Err(QuantumError::NotHermitian { defect });
        }
        if generator.nrows() != 1 << targets.len() {
            return Err(QuantumError::DimensionMismatch { expected: 1 << targets.len(), actual: generator.nrows() });
        }
        Ok(Self { kind: GateKind::Generated(generator), targets, parameter: Some(theta) })
    }

    pub fn is_parameterized(&self) -> bool {
        self.parameter.is_some()
    }

    /// Check that the targets are distinct, in range and of the right arity.
    pub fn validate(&self, qubits: usize) -> Result<()> {
        let expected = match &self.kind {
            GateKind::RotationY | GateKind::RotationZ => Some(1),
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => Some(2),
            GateKind::Ccx => Some(3),
            GateKind::FixedUnitary(_) | GateKind::Generated(_) => None,
        };
        if let Some(k) = expected {
            if self.targets.len() != k {
                return Err(arity_error(&self.targets, qubits));
            }
        }
        let mut sorted = self.targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if self.targets.is_empty() || sorted.len() != self.targets.len() || sorted.iter().any(|&t| t >= qubits) {
            return Err(arity_error(&self.targets, qubits));
        }
        Ok(())
    }

    /// Hermitian generator `H` with `U(θ) = exp(−iθH)`, for trainable gates.
    pub fn generator(&self) -> Option<CMatrix> {
        match &self.kind {
            GateKind::RotationY => Some(linalg::pauli_y().scale(0.5)),
            GateKind::RotationZ => Some(linalg::pauli_z().scale(0.5)),
            GateKind::Generated(h) => Some(h.clone()),
            _ => None,
        }
    }

    /// True when the generator spectrum is exactly `{±1/2}`, the premise of the
    /// two-term parameter-shift rule.
    pub fn is_pauli_generated(&self) -> bool {
        match &self.kind {
            GateKind::RotationY | GateKind::RotationZ => true,
            GateKind::Generated(h) => {
                linalg::hermitian_eigenvalues(h).iter().all(|v| (v.abs() - 0.5).abs() < 1e-9)
            }
            _ => false,
        }
    }

    /// Local unitary on the gate's targets.
    pub fn matrix(&self) -> CMatrix {
        let theta = self.parameter.unwrap_or(0.0);
        match &self.kind {
            GateKind::RotationY => ry_matrix(theta),
            GateKind::RotationZ => rz_matrix(theta),
            GateKind::Cnot => permutation(4, |i| if i >= 2 { i ^ 1 } else { i }),
            GateKind::Cz => {
                let mut m = linalg::identity(4);
                m[(3, 3)] = -ONE;
                m
            }
            GateKind::Ccx => permutation(8, |i| if i >= 6 { i ^ 1 } else { i }),
            GateKind::Swap => permutation(4, |i| ((i & 1) << 1) | (i >> 1)),
            GateKind::FixedUnitary(u) => u.clone(),
            GateKind::Generated(h) => linalg::expm_i_hermitian(h, -theta),
        }
    }

    /// `∂U/∂θ = −iH·U(θ)` on the gate's targets.
    pub fn derivative_matrix(&self) -> Option<CMatrix> {
        let h = self.generator()?;
        Some((h * self.matrix()) * Complex64::new(0.0, -1.0))
    }

    pub fn with_parameter(&self, theta: f64) -> Self {
        let mut g = self.clone();
        if g.parameter.is_some() {
            g.parameter = Some(theta);
        }
        g
    }

    /// Full-register operator.
    pub fn full_matrix(&self, qubits: usize) -> CMatrix {
        linalg::embed(&self.matrix(), &self.targets, qubits)
    }
}

fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> CMatrix {
    let mut m = CMatrix::from_element(dim, dim, ZERO);
    for i in 0..dim {
        m[(f(i), i)] = ONE;
    }
    m
}
