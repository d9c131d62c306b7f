//! Mixed states, partial traces and the SWAP-trick purity estimator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::error::{QuantumError, Result};
use super::linalg::{self, CMatrix, ONE, ZERO};
use super::state::QuantumState;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOLERANCE: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    matrix: CMatrix,
    qubit_count: usize,
}

impl DensityOperator {
    /// Validate a matrix as a density operator (Hermitian, unit trace, PSD).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim || !dim.is_power_of_two() {
            return Err(QuantumError::NotPowerOfTwo { len: dim });
        }
        let defect = linalg::hermitian_defect(&matrix);
        if defect > HERMITIAN_TOLERANCE {
            return Err(QuantumError::NotHermitian { defect });
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(QuantumError::InvalidDensity { reason: format!("trace {tr}") });
        }
        let min_eig = linalg::hermitian_eigenvalues(&matrix)[0];
        if min_eig < PSD_TOLERANCE {
            return Err(QuantumError::InvalidDensity { reason: format!("eigenvalue {min_eig:e} < 0") });
        }
        Ok(Self::from_raw(matrix))
    }

    pub(crate) fn from_raw(matrix: CMatrix) -> Self {
        let qubit_count = matrix.nrows().trailing_zeros() as usize;
        Self { matrix, qubit_count }
    }

    pub fn from_state(state: &QuantumState) -> Self {
        Self::from_raw(state.projector())
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        Self::from_raw(CMatrix::identity(dim, dim).scale(1.0 / dim as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = probabilities.len();
        let m = CMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(probabilities[i], 0.0) } else { ZERO });
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// `Tr(ρ²)` computed directly.
    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .filter(|&p| p > 1e-15)
            .map(|p| -p * p.log2())
            .sum()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self::from_raw(linalg::kron(&self.matrix, &other.matrix))
    }

    /// `U ρ U†` for a full-register unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityOperator> {
        if u.nrows() != self.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.dim(), actual: u.nrows() });
        }
        Ok(Self::from_raw(u * &self.matrix * u.adjoint()))
    }
}

/// Partial trace of an arbitrary square operator on `n` qubits, keeping
/// `keep` (returned in ascending qubit order).
pub fn partial_trace_matrix(m: &CMatrix, n: usize, keep: &[usize]) -> Result<CMatrix> {
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep.is_empty() || keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= n) {
        return Err(QuantumError::InvalidIndices { indices: keep.to_vec(), qubits: n });
    }
    if m.nrows() != 1 << n {
        return Err(QuantumError::DimensionMismatch { expected: 1 << n, actual: m.nrows() });
    }
    if keep_sorted.len() == n {
        return Ok(m.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep_sorted.contains(q)).collect();
    let kd = 1usize << keep_sorted.len();
    let td = 1usize << traced.len();
    let kept_offsets: Vec<usize> = (0..kd).map(|l| linalg::scatter(l, &keep_sorted, n)).collect();
    let traced_offsets: Vec<usize> = (0..td).map(|l| linalg::scatter(l, &traced, n)).collect();
    let mut out = CMatrix::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = ZERO;
            for t in &traced_offsets {
                acc += m[(kept_offsets[a] | t, kept_offsets[b] | t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density operator on the qubits in `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let m = partial_trace_matrix(rho.matrix(), rho.qubit_count(), keep)?;
    Ok(DensityOperator::from_raw(m))
}

/// SWAP operator exchanging two `qubits`-qubit registers of a doubled
/// `2·qubits` register.
pub fn swap_operator(qubits: usize) -> CMatrix {
    let d = 1usize << qubits;
    let mut s = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = ONE;
        }
    }
    s
}

/// Purity via the SWAP trick, `Tr(S·(X⊗X))`.
pub fn swap_trick_purity(x: &DensityOperator) -> f64 {
    let s = swap_operator(x.qubit_count());
    let doubled = linalg::kron(x.matrix(), x.matrix());
    linalg::trace_product(&s, &doubled).re
}
