//! Pure states and the two feature encodings (amplitude and product-state).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::error::{QuantumError, Result};
use super::linalg::{self, CMatrix, ONE, ZERO};

pub const NORM_TOLERANCE: f64 = 1e-10;

/// Input-norm tolerance for amplitude encoding.
pub const ENCODE_NORM_TOLERANCE: f64 = 1e-8;

/// Angle map for product-state encoding: a feature in `[0, 1]` becomes the
/// rotation angle `π·x`.
pub const PRODUCT_ANGLE_SCALE: f64 = PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    qubit_count: usize,
}

impl QuantumState {
    /// `|0…0⟩` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << qubits];
        amplitudes[0] = ONE;
        Self { amplitudes, qubit_count: qubits }
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(QuantumError::DimensionMismatch { expected: dim, actual: index });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes, qubit_count: qubits })
    }

    /// Wrap an amplitude vector, checking the length and the unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(QuantumError::NotPowerOfTwo { len });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(Self { qubit_count: len.trailing_zeros() as usize, amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        let qubit_count = amplitudes.len().trailing_zeros() as usize;
        Self { amplitudes, qubit_count }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|ψ⟩⟨ψ|` as a dense matrix.
    pub fn projector(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// Tensor product `self ⊗ other` (self on the leading qubits).
    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                out.push(a * b);
            }
        }
        QuantumState::from_raw(out)
    }

    /// Apply a local operator on `targets`. Does not renormalize.
    pub fn apply_local(&mut self, local: &CMatrix, targets: &[usize]) {
        let n = self.qubit_count;
        linalg::apply_local(&mut self.amplitudes, local, targets, n);
    }
}

/// Number of qubits used to hold a `d`-dimensional feature vector: `⌈log₂ d⌉`,
/// with a single qubit for `d = 1`.
pub fn qubits_for_dimension(d: usize) -> usize {
    if d <= 2 {
        1
    } else {
        (usize::BITS - (d - 1).leading_zeros()) as usize
    }
}

/// Amplitude encoding with zero padding to the next power of two.
pub fn amplitude_encode(x: &[f64]) -> Result<QuantumState> {
    if x.is_empty() {
        return Err(QuantumError::EmptyInput);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > ENCODE_NORM_TOLERANCE {
        return Err(QuantumError::NotNormalized { norm });
    }
    let q = qubits_for_dimension(x.len());
    let mut amplitudes = vec![ZERO; 1 << q];
    for (a, &v) in amplitudes.iter_mut().zip(x) {
        *a = Complex64::new(v, 0.0);
    }
    Ok(QuantumState::from_raw(amplitudes))
}

/// `R_Y(θ) = exp(−iθY/2)`.
pub fn ry_matrix(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    )
}

/// `R_Z(θ) = exp(−iθZ/2)`.
pub fn rz_matrix(theta: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    )
}

fn check_unit_interval(x: &[f64]) -> Result<()> {
    for (index, &value) in x.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(QuantumError::OutOfRange { index, value, lo: 0.0, hi: 1.0 });
        }
    }
    Ok(())
}

/// Product-state encoding `⊗ᵢ R_Y(π·xᵢ)|0⟩`, one qubit per feature.
pub fn product_encode(x: &[f64]) -> Result<QuantumState> {
    if x.is_empty() {
        return Err(QuantumError::EmptyInput);
    }
    check_unit_interval(x)?;
    let mut state = QuantumState::from_raw(vec![ONE]);
    for &v in x {
        let (s, c) = (PRODUCT_ANGLE_SCALE * v / 2.0).sin_cos();
        let qubit = QuantumState::from_raw(vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)]);
        state = state.tensor(&qubit);
    }
    Ok(state)
}

/// Product-state encoding of `d` features onto `qubits ≤ d` qubits.
///
/// Feature `i` lands on qubit `i mod qubits`; successive features on the same
/// qubit alternate between `R_Y(π·x)` and `R_Z(π·x)`, starting with `R_Y`.
/// Every gate is single-qubit, so the result is always a product state.
pub fn product_encode_folded(x: &[f64], qubits: usize) -> Result<QuantumState> {
    if x.is_empty() {
        return Err(QuantumError::EmptyInput);
    }
    if qubits == 0 || qubits > x.len().max(1) {
        return Err(QuantumError::DimensionMismatch { expected: x.len(), actual: qubits });
    }
    check_unit_interval(x)?;
    let mut state = QuantumState::from_raw(vec![ONE]);
    for q in 0..qubits {
        let mut local = [ONE, ZERO];
        for (round, i) in (q..x.len()).step_by(qubits).enumerate() {
            let angle = PRODUCT_ANGLE_SCALE * x[i];
            let m = if round % 2 == 0 { ry_matrix(angle) } else { rz_matrix(angle) };
            local = [m[(0, 0)] * local[0] + m[(0, 1)] * local[1], m[(1, 0)] * local[0] + m[(1, 1)] * local[1]];
        }
        state = state.tensor(&QuantumState::from_raw(local.to_vec()));
    }
    Ok(state)
}
