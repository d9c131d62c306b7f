//! Shot-noise and sample-complexity estimates.

use serde::{Deserialize, Serialize};

use super::error::{QuantumError, Result};

/// Standard-error bound `√(p(1−p)/shots)` for a probability estimated from
/// `shots` projective measurements.
pub fn projection_noise_bound(p: f64, shots: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::OutOfRange { index: 0, value: p, lo: 0.0, hi: 1.0 });
    }
    if shots == 0 {
        return Err(QuantumError::OutOfRange { index: 1, value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    Ok((p * (1.0 - p) / shots as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    /// State copies per training round with adjoint-channel propagation.
    pub n_copies: u64,
    /// Copies for the full-state tomography comparison.
    pub n_tomography: u64,
    pub n_proj: u64,
    /// Tunable gates per layer, `m_0 … m_{L+1}`.
    pub m_list: Vec<u64>,
    /// Register dimensions per layer, `d_0 … d_{L+1}`.
    pub d_list: Vec<u64>,
}

impl ResourceEstimate {
    /// `n_tomography / n_copies`, `None` when no copies are needed.
    pub fn ratio(&self) -> Option<f64> {
        (self.n_copies > 0).then(|| self.n_tomography as f64 / self.n_copies as f64)
    }
}

const OVERFLOW_COPIES: QuantumError = QuantumError::Overflow { what: "n_copies" };
const OVERFLOW_TOM: QuantumError = QuantumError::Overflow { what: "n_tomography" };

/// Copy counts for one training round, summed over layers `l = 1 … L+1`:
///
/// * `n_copies = n_proj · Σ m_l (4^(m_{l−1}+1) − 1)`
/// * `n_tomography = n_proj · Σ m_l · 2((d_l·d_{l−1})² − 1)`
///
/// Both lists are indexed `0 … L+1` and must have equal length. Arithmetic is
/// checked; overflow is an error.
pub fn resource_counts(n_proj: u64, m_list: &[u64], d_list: &[u64]) -> Result<ResourceEstimate> {
    if m_list.len() != d_list.len() {
        return Err(QuantumError::LengthMismatch { left: m_list.len(), right: d_list.len() });
    }
    let mut copies: u64 = 0;
    let mut tom: u64 = 0;
    for l in 1..m_list.len() {
        let exponent = m_list[l - 1].checked_add(1).and_then(|e| u32::try_from(e).ok()).ok_or(OVERFLOW_COPIES)?;
        let pow = 4u64.checked_pow(exponent).ok_or(OVERFLOW_COPIES)?;
        let term = m_list[l].checked_mul(pow - 1).ok_or(OVERFLOW_COPIES)?;
        copies = copies.checked_add(term).ok_or(OVERFLOW_COPIES)?;

        let dd = d_list[l].checked_mul(d_list[l - 1]).ok_or(OVERFLOW_TOM)?;
        let sq = dd.checked_mul(dd).ok_or(OVERFLOW_TOM)?;
        let inner = sq.saturating_sub(1).checked_mul(2).ok_or(OVERFLOW_TOM)?;
        let term = m_list[l].checked_mul(inner).ok_or(OVERFLOW_TOM)?;
        tom = tom.checked_add(term).ok_or(OVERFLOW_TOM)?;
    }
    Ok(ResourceEstimate {
        n_copies: copies.checked_mul(n_proj).ok_or(OVERFLOW_COPIES)?,
        n_tomography: tom.checked_mul(n_proj).ok_or(OVERFLOW_TOM)?,
        n_proj,
        m_list: m_list.to_vec(),
        d_list: d_list.to_vec(),
    })
}
