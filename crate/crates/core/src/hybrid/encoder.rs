use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{HybridError, Result};
use crate::quantum::circuit::{EntanglerGate, ParameterizedCircuit, Topology};
use crate::quantum::gate::Gate;
use crate::quantum::observable::{expectation, Observable};
use crate::quantum::state::{amplitude_encode, product_encode_folded, qubits_for_dimension, QuantumState};

pub const AMPLITUDE_DEPTHS: std::ops::RangeInclusive<u8> = 3..=6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingKind {
    None,
    Partial,
    Full,
    Amplitude(u8),
}

impl EncodingKind {
    pub const ALL: [EncodingKind; 7] = [
        EncodingKind::None,
        EncodingKind::Partial,
        EncodingKind::Full,
        EncodingKind::Amplitude(3),
        EncodingKind::Amplitude(4),
        EncodingKind::Amplitude(5),
        EncodingKind::Amplitude(6),
    ];

    pub fn is_amplitude(self) -> bool {
        matches!(self, EncodingKind::Amplitude(_))
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodingKind::None => f.write_str("none"),
            EncodingKind::Partial => f.write_str("partial"),
            EncodingKind::Full => f.write_str("full"),
            EncodingKind::Amplitude(k) => write!(f, "amplitude{k}"),
        }
    }
}

impl FromStr for EncodingKind {
    type Err = HybridError;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "none" => EncodingKind::None,
            "partial" => EncodingKind::Partial,
            "full" => EncodingKind::Full,
            other => {
                let k = other
                    .strip_prefix("amplitude")
                    .and_then(|k| k.parse::<u8>().ok())
                    .ok_or_else(|| HybridError::UnsupportedKind(other.to_string()))?;
                EncodingKind::Amplitude(k)
            }
        };
        kind.check()?;
        Ok(kind)
    }
}

impl EncodingKind {
    fn check(self) -> Result<()> {
        match self {
            EncodingKind::Amplitude(k) if !AMPLITUDE_DEPTHS.contains(&k) => Err(HybridError::UnsupportedKind(self.to_string())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub kind: EncodingKind,
    pub feature_dim: usize,
    /// 0 for `None`.
    pub qubits: usize,
    pub topology: Topology,
    pub pqc_layers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub observables: Vec<Observable>,
}

impl ObservableSet {
    /// `Z` on every qubit, then `Z⊗Z` on each adjacent pair.
    pub fn z_and_adjacent_zz(qubits: usize) -> Self {
        let mut observables: Vec<Observable> =
            (0..qubits).map(|q| Observable::z(q, qubits).expect("qubit in range")).collect();
        observables.extend((0..qubits.saturating_sub(1)).map(|q| Observable::zz(q, q + 1, qubits).expect("in range")));
        Self { observables }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }
}

/// Encoding, circuit and readout for one feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "EncoderFile", into = "EncoderFile")]
pub struct Encoder {
    pub config: EncodingConfig,
    pub circuit: ParameterizedCircuit,
    pub observables: ObservableSet,
}

/// Persisted form; the observable set is rebuilt from the qubit count.
#[derive(Clone, Serialize, Deserialize)]
struct EncoderFile {
    config: EncodingConfig,
    circuit: ParameterizedCircuit,
}

impl From<Encoder> for EncoderFile {
    fn from(e: Encoder) -> Self {
        Self { config: e.config, circuit: e.circuit }
    }
}

impl From<EncoderFile> for Encoder {
    fn from(f: EncoderFile) -> Self {
        let observables = ObservableSet::z_and_adjacent_zz(f.config.qubits);
        Self { config: f.config, circuit: f.circuit, observables }
    }
}

pub fn build_encoder(kind: EncodingKind, d: usize, seed: u64) -> Result<Encoder> {
    kind.check()?;
    if d == 0 {
        return Err(HybridError::ShapeMismatch { expected: 1, actual: 0 });
    }
    let q = qubits_for_dimension(d);
    let (layers, topology, entangler) = match kind {
        EncodingKind::None => {
            let config = EncodingConfig { kind, feature_dim: d, qubits: 0, topology: Topology::None, pqc_layers: 0 };
            return Ok(Encoder { config, circuit: ParameterizedCircuit::new(0), observables: ObservableSet { observables: vec![] } });
        }
        EncodingKind::Partial => (1, Topology::LinearNearestNeighbor, EntanglerGate::Cnot),
        EncodingKind::Full => (2, Topology::AllToAll, EntanglerGate::Cz),
        EncodingKind::Amplitude(k) => (k as usize, Topology::Ring, EntanglerGate::Cnot),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<f64> = (0..layers * q).map(|_| rng.random_range(-PI..PI)).collect();
    let mut circuit = ParameterizedCircuit::layered(q, layers, topology, entangler, &angles)?;
    if kind == EncodingKind::Full && q >= 3 {
        circuit.push(Gate::ccx(0, 1, 2))?;
    }
    Ok(Encoder {
        config: EncodingConfig { kind, feature_dim: d, qubits: q, topology, pqc_layers: layers },
        circuit,
        observables: ObservableSet::z_and_adjacent_zz(q),
    })
}

impl Encoder {
    /// Width of `extract_features`: `d` for `None`, `R` for product kinds,
    /// `R + 1` for amplitude kinds (the scaled input norm is appended).
    pub fn output_width(&self) -> usize {
        match self.config.kind {
            EncodingKind::None => self.config.feature_dim,
            k if k.is_amplitude() => self.observables.len() + 1,
            _ => self.observables.len(),
        }
    }

    /// Encoded state before the trainable circuit, plus the scaled norm for amplitude kinds.
    pub fn encode(&self, x: &[f64]) -> Result<(QuantumState, Option<f64>)> {
        let d = self.config.feature_dim;
        if x.len() != d {
            return Err(HybridError::ShapeMismatch { expected: d, actual: x.len() });
        }
        match self.config.kind {
            EncodingKind::None => Err(HybridError::UnsupportedKind("none has no quantum state".into())),
            EncodingKind::Amplitude(_) => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let state = if norm == 0.0 {
                    QuantumState::zero(self.config.qubits)
                } else {
                    let unit: Vec<f64> = x.iter().map(|v| v / norm).collect();
                    amplitude_encode(&unit)?
                };
                Ok((state, Some(norm / (d as f64).sqrt())))
            }
            _ => Ok((product_encode_folded(x, self.config.qubits)?, None)),
        }
    }

    fn readout(&self, state: &QuantumState, extra: Option<f64>) -> Result<Vec<f64>> {
        let mut z = self.observables.observables.iter().map(|m| expectation(state, m)).collect::<std::result::Result<Vec<_>, _>>()?;
        z.extend(extra);
        Ok(z)
    }

    /// `z_r = Tr(M_r U ρ(x) U†)`; `None` passes `x` through.
    pub fn extract_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.extract_with(&self.circuit, x)
    }

    pub(crate) fn extract_with(&self, circuit: &ParameterizedCircuit, x: &[f64]) -> Result<Vec<f64>> {
        if self.config.kind == EncodingKind::None {
            if x.len() != self.config.feature_dim {
                return Err(HybridError::ShapeMismatch { expected: self.config.feature_dim, actual: x.len() });
            }
            return Ok(x.to_vec());
        }
        let (state, extra) = self.encode(x)?;
        self.readout(&circuit.apply(&state)?, extra)
    }

    /// `∂z_r/∂θ_j` by parameter shift; rows are parameters.
    pub fn feature_jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.config.kind == EncodingKind::None {
            return Ok(Vec::new());
        }
        let (state, _) = self.encode(x)?;
        (0..self.circuit.parameter_count())
            .map(|j| {
                let plus = self.readout(&self.circuit.shifted(j, PI / 2.0).apply(&state)?, None)?;
                let minus = self.readout(&self.circuit.shifted(j, -PI / 2.0).apply(&state)?, None)?;
                Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / 2.0).collect())
            })
            .collect()
    }
}

pub fn extract_features(encoder: &Encoder, x: &[f64]) -> Result<Vec<f64>> {
    encoder.extract_features(x)
}
