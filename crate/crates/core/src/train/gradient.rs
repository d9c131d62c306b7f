//! Three independent gradient routes for `p(θ) = Tr(M·X_L(θ))`:
//! the two-term parameter-shift rule, adjoint-channel backpropagation and
//! central finite differences.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{Result, TrainError};
use crate::quantum::channel::QuantumChannel;
use crate::quantum::circuit::{apply_circuit, ParameterizedCircuit};
use crate::quantum::density::DensityOperator;
use crate::quantum::linalg::{self, CMatrix};
use crate::quantum::observable::{expectation, Observable};
use crate::quantum::{QuantumError, QuantumState};

pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientMethod {
    ParameterShift,
    Adjoint,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub values: Vec<f64>,
    pub method: GradientMethod,
}

impl GradientVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &GradientVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Central differences `[f(θ+εeᵢ) − f(θ−εeᵢ)]/(2ε)`.
pub fn finite_difference_grad<F>(evaluate: F, theta: &[f64], eps: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            probe[i] = theta[i] + eps;
            let plus = evaluate(&probe);
            probe[i] = theta[i] - eps;
            let minus = evaluate(&probe);
            probe[i] = theta[i];
            (plus - minus) / (2.0 * eps)
        })
        .collect()
}

fn circuit_expectation(circuit: &ParameterizedCircuit, input: &QuantumState, obs: &Observable) -> Result<f64> {
    Ok(expectation(&apply_circuit(input, circuit)?, obs)?)
}

/// Gradient of `⟨ψ(θ)|M|ψ(θ)⟩` by shifting each parameter by `±π/2`.
pub fn parameter_shift_grad(
    circuit: &ParameterizedCircuit,
    input: &QuantumState,
    obs: &Observable,
) -> Result<GradientVector> {
    let gate_indices = circuit.parameter_gate_indices();
    for (index, &gi) in gate_indices.iter().enumerate() {
        if !circuit.gates()[gi].is_pauli_generated() {
            return Err(TrainError::UnsupportedGate { index });
        }
    }
    let values = (0..gate_indices.len())
        .map(|i| {
            let plus = circuit_expectation(&circuit.shifted(i, FRAC_PI_2), input, obs)?;
            let minus = circuit_expectation(&circuit.shifted(i, -FRAC_PI_2), input, obs)?;
            Ok((plus - minus) / 2.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientVector { values, method: GradientMethod::ParameterShift })
}

/// One Stinespring layer whose joint unitary is a parameterized circuit on
/// `system_qubits + ancilla_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelLayer {
    pub circuit: ParameterizedCircuit,
    pub system_qubits: usize,
    pub ancilla_qubits: usize,
}

impl ChannelLayer {
    pub fn new(circuit: ParameterizedCircuit, system_qubits: usize, ancilla_qubits: usize) -> Result<Self> {
        if circuit.qubits() != system_qubits + ancilla_qubits {
            return Err(QuantumError::DimensionMismatch {
                expected: system_qubits + ancilla_qubits,
                actual: circuit.qubits(),
            }
            .into());
        }
        Ok(Self { circuit, system_qubits, ancilla_qubits })
    }

    pub fn channel(&self) -> QuantumChannel {
        QuantumChannel::new(self.circuit.unitary(), self.system_qubits, self.ancilla_qubits)
            .expect("circuit unitaries are unitary")
    }
}

/// `𝓔_L ∘ … ∘ 𝓔_1` with trainable gates inside each layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelNetwork {
    layers: Vec<ChannelLayer>,
}

impl ChannelNetwork {
    pub fn new(layers: Vec<ChannelLayer>) -> Result<Self> {
        if let Some(first) = layers.first() {
            if let Some(bad) = layers.iter().find(|l| l.system_qubits != first.system_qubits) {
                return Err(QuantumError::DimensionMismatch { expected: first.system_qubits, actual: bad.system_qubits }
                    .into());
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[ChannelLayer] {
        &self.layers
    }

    pub fn system_qubits(&self) -> usize {
        self.layers.first().map_or(0, |l| l.system_qubits)
    }

    /// Parameters in layer-major, gate order.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.circuit.parameters()).collect()
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        let total: usize = self.layers.iter().map(|l| l.circuit.parameter_count()).sum();
        if values.len() != total {
            return Err(TrainError::LengthMismatch { what: "network parameters", expected: total, actual: values.len() });
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let n = l.circuit.parameter_count();
            l.circuit.set_parameters(&values[offset..offset + n])?;
            offset += n;
        }
        Ok(())
    }

    pub fn forward(&self, input: &DensityOperator) -> Result<DensityOperator> {
        let mut x = input.matrix().clone();
        for l in &self.layers {
            x = l.channel().apply_matrix(&x)?;
        }
        Ok(DensityOperator::from_raw(x))
    }

    pub fn prediction(&self, input: &DensityOperator, obs: &Observable) -> Result<f64> {
        Ok(expectation(&self.forward(input)?, obs)?)
    }
}

/// Gradient by one forward pass caching every `X_l`, one adjoint sweep
/// `A_{l−1} = 𝓔_l†(A_l)`, and per-gate traces `Tr(A_l · ∂𝓔_l(X_{l−1})/∂θ)`
/// with `∂U/∂θ = −iHU`.
pub fn adjoint_backprop_grad(
    network: &ChannelNetwork,
    input: &DensityOperator,
    obs: &Observable,
) -> Result<GradientVector> {
    let sys_dim = 1usize << network.system_qubits();
    if input.dim() != sys_dim {
        return Err(QuantumError::DimensionMismatch { expected: sys_dim, actual: input.dim() }.into());
    }
    if obs.dim() != sys_dim {
        return Err(QuantumError::DimensionMismatch { expected: sys_dim, actual: obs.dim() }.into());
    }

    let channels: Vec<QuantumChannel> = network.layers.iter().map(ChannelLayer::channel).collect();
    let mut states = Vec::with_capacity(channels.len() + 1);
    states.push(input.matrix().clone());
    for ch in &channels {
        let next = ch.apply_matrix(states.last().expect("non-empty"))?;
        states.push(next);
    }

    let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); channels.len()];
    let mut a = obs.matrix().clone();
    for l in (0..channels.len()).rev() {
        per_layer[l] = layer_gradient(&network.layers[l], &channels[l], &states[l], &a);
        a = channels[l].adjoint_apply_matrix(&a)?;
    }
    Ok(GradientVector { values: per_layer.into_iter().flatten().collect(), method: GradientMethod::Adjoint })
}

/// `∂p/∂θ_j = 2·Re Tr[(A⊗I) · ∂U_j · ρ̃ · U†]` for each trainable gate of one
/// layer, where `ρ̃ = X ⊗ |0⟩⟨0|` and `∂U_j = (Π_{r>j} G_r)(−iH_j G_j)(Π_{r<j} G_r)`.
fn layer_gradient(layer: &ChannelLayer, channel: &QuantumChannel, x_in: &CMatrix, a_out: &CMatrix) -> Vec<f64> {
    let n = layer.circuit.qubits();
    let gates = layer.circuit.gates();
    let full: Vec<CMatrix> = gates.iter().map(|g| g.full_matrix(n)).collect();

    // prefix[k] = G_{k-1} … G_0; suffix[k] = G_{m-1} … G_{k+1}
    let dim = 1usize << n;
    let mut prefix = Vec::with_capacity(gates.len() + 1);
    prefix.push(linalg::identity(dim));
    for g in &full {
        let p = g * prefix.last().expect("non-empty");
        prefix.push(p);
    }
    let mut suffix = vec![linalg::identity(dim); gates.len()];
    for k in (0..gates.len().saturating_sub(1)).rev() {
        suffix[k] = &suffix[k + 1] * &full[k + 1];
    }

    let u = channel.unitary();
    let rho = channel.dilate(x_in);
    let lifted = linalg::kron(a_out, &linalg::identity(1 << layer.ancilla_qubits));
    // right = ρ̃ · U† · (A⊗I), so each term is Tr(∂U · right)
    let right = rho * u.adjoint() * lifted;

    gates
        .iter()
        .enumerate()
        .filter_map(|(k, g)| {
            let local = g.derivative_matrix()?;
            let d = linalg::embed(&local, &g.targets, n);
            let du = &suffix[k] * d * &prefix[k];
            Some(2.0 * linalg::trace_product(&du, &right).re)
        })
        .collect()
}
