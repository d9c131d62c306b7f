//! Commutator-form updates for networks of freely tunable unitaries.
//!
//! For gate `j` of layer `l` and sample `x`, let `A_x` be the joint
//! (system ⊗ ancilla) state right after the gate and `B_x` the target
//! projector pulled back to the same point through the remaining gates and the
//! adjoints of later layers. Then
//!
//! `K_j = 1/(2λN) · Σ_x Tr_rest(i[A_x, B_x])`
//!
//! and `U_j ← exp(iηK_j)·U_j`. The factor `i` makes `K_j` Hermitian, so the
//! update stays unitary, and gives `d/dη fidelity = Tr(K_j M_j) ≥ 0` at `η = 0`.
//!
//! Gate supports are restricted to the system register of their layer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cost::TargetProjector;
use super::{Result, TrainError};
use crate::quantum::channel::QuantumChannel;
use crate::quantum::density::{partial_trace_matrix, DensityOperator};
use crate::quantum::linalg::{self, CMatrix, I};
use crate::quantum::random::random_unitary;
use crate::quantum::QuantumError;

const UNITARY_CHECK: f64 = 1e-10;
const HERMITIAN_CHECK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunableUnitary {
    pub support: Vec<usize>,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryLayer {
    system_qubits: usize,
    ancilla_qubits: usize,
    gates: Vec<TunableUnitary>,
}

impl UnitaryLayer {
    pub fn new(system_qubits: usize, ancilla_qubits: usize, gates: Vec<TunableUnitary>) -> Result<Self> {
        for g in &gates {
            let mut s = g.support.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.len() != g.support.len() || s.iter().any(|&q| q >= system_qubits) {
                return Err(QuantumError::InvalidIndices { indices: g.support.clone(), qubits: system_qubits }.into());
            }
            if g.matrix.nrows() != 1 << s.len() {
                return Err(QuantumError::DimensionMismatch { expected: 1 << s.len(), actual: g.matrix.nrows() }.into());
            }
            let defect = linalg::unitary_defect(&g.matrix);
            if defect > UNITARY_CHECK {
                return Err(QuantumError::NotUnitary { defect }.into());
            }
        }
        Ok(Self { system_qubits, ancilla_qubits, gates })
    }

    pub fn gates(&self) -> &[TunableUnitary] {
        &self.gates
    }

    fn joint_qubits(&self) -> usize {
        self.system_qubits + self.ancilla_qubits
    }

    fn full_gates(&self) -> Vec<CMatrix> {
        let n = self.joint_qubits();
        self.gates.iter().map(|g| linalg::embed(&g.matrix, &g.support, n)).collect()
    }

    pub fn channel(&self) -> QuantumChannel {
        let mut u = linalg::identity(1 << self.joint_qubits());
        for g in self.full_gates() {
            u = g * u;
        }
        QuantumChannel::new(u, self.system_qubits, self.ancilla_qubits).expect("product of unitaries")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryNetwork {
    layers: Vec<UnitaryLayer>,
}

impl UnitaryNetwork {
    pub fn new(layers: Vec<UnitaryLayer>) -> Result<Self> {
        if let Some(first) = layers.first() {
            if let Some(bad) = layers.iter().find(|l| l.system_qubits != first.system_qubits) {
                return Err(QuantumError::DimensionMismatch { expected: first.system_qubits, actual: bad.system_qubits }
                    .into());
            }
        }
        Ok(Self { layers })
    }

    /// Haar-random gates on the given supports, one entry per layer of
    /// `(ancilla_qubits, supports)`.
    pub fn random(system_qubits: usize, layout: &[(usize, Vec<Vec<usize>>)], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layout
            .iter()
            .map(|(anc, supports)| {
                let gates = supports
                    .iter()
                    .map(|s| TunableUnitary { support: s.clone(), matrix: random_unitary(1 << s.len(), &mut rng) })
                    .collect();
                UnitaryLayer::new(system_qubits, *anc, gates)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[UnitaryLayer] {
        &self.layers
    }

    pub fn gate_matrices(&self) -> impl Iterator<Item = &CMatrix> {
        self.layers.iter().flat_map(|l| l.gates.iter().map(|g| &g.matrix))
    }

    pub fn forward(&self, input: &DensityOperator) -> Result<DensityOperator> {
        let mut x = input.matrix().clone();
        for l in &self.layers {
            x = l.channel().apply_matrix(&x)?;
        }
        Ok(DensityOperator::from_raw(x))
    }

    /// Mean fidelity `(1/N) Σ Tr(P_x 𝓔(ρ_x))` over a batch.
    pub fn fidelity(&self, batch: &[(DensityOperator, TargetProjector)]) -> Result<f64> {
        if batch.is_empty() {
            return Err(TrainError::EmptyBatch);
        }
        let mut total = 0.0;
        for (rho, target) in batch {
            let out = self.forward(rho)?;
            total += linalg::trace_product(target.matrix(), out.matrix()).re;
        }
        Ok(total / batch.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateMatrix {
    pub layer: usize,
    pub gate: usize,
    pub k: CMatrix,
}

/// Update matrices `K` for every gate, in layer-major order.
pub fn commutator_update_matrices(
    batch: &[(DensityOperator, TargetProjector)],
    network: &UnitaryNetwork,
    lambda: f64,
) -> Result<Vec<UpdateMatrix>> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(TrainError::InvalidConfig(format!("regularization must be positive, got {lambda}")));
    }
    let mut sums: Vec<Vec<CMatrix>> = network
        .layers
        .iter()
        .map(|l| l.gates.iter().map(|g| CMatrix::zeros(g.matrix.nrows(), g.matrix.ncols())).collect())
        .collect();

    // Samples are reduced in index order so results are bit-stable.
    for (rho, target) in batch {
        let sample = sample_commutators(network, rho, target)?;
        for (acc_layer, layer) in sums.iter_mut().zip(sample) {
            for (acc, m) in acc_layer.iter_mut().zip(layer) {
                *acc += m;
            }
        }
    }

    let scale = 1.0 / (2.0 * lambda * batch.len() as f64);
    Ok(sums
        .into_iter()
        .enumerate()
        .flat_map(|(layer, gates)| {
            gates
                .into_iter()
                .enumerate()
                .map(move |(gate, m)| UpdateMatrix { layer, gate, k: linalg::hermitize(&m.scale(scale)) })
        })
        .collect())
}

/// Per-gate `Tr_rest(i[A, B])` for one sample.
fn sample_commutators(
    network: &UnitaryNetwork,
    input: &DensityOperator,
    target: &TargetProjector,
) -> Result<Vec<Vec<CMatrix>>> {
    let channels: Vec<QuantumChannel> = network.layers.iter().map(UnitaryLayer::channel).collect();
    let mut states = vec![input.matrix().clone()];
    for ch in &channels {
        let next = ch.apply_matrix(states.last().expect("non-empty"))?;
        states.push(next);
    }
    let out_dim = states.last().expect("non-empty").nrows();
    if target.matrix().nrows() != out_dim {
        return Err(QuantumError::DimensionMismatch { expected: out_dim, actual: target.matrix().nrows() }.into());
    }

    let mut result = vec![Vec::new(); channels.len()];
    let mut b = target.matrix().clone();
    for l in (0..channels.len()).rev() {
        let layer = &network.layers[l];
        let n = layer.joint_qubits();
        let full = layer.full_gates();

        // forward blocks A_j after each gate
        let mut a = channels[l].dilate(&states[l]);
        let mut forward = Vec::with_capacity(full.len());
        for g in &full {
            a = g * a * g.adjoint();
            forward.push(a.clone());
        }
        // backward blocks B_j, pulled back from the layer output
        let mut bj = linalg::kron(&b, &linalg::identity(1 << layer.ancilla_qubits));
        let mut per_gate = vec![CMatrix::zeros(0, 0); full.len()];
        for j in (0..full.len()).rev() {
            let comm = (&forward[j] * &bj - &bj * &forward[j]) * I;
            per_gate[j] = partial_trace_matrix(&comm, n, &layer.gates[j].support)?;
            bj = full[j].adjoint() * bj * &full[j];
        }
        result[l] = per_gate;
        b = channels[l].adjoint_apply_matrix(&b)?;
    }
    Ok(result)
}

/// `exp(iηK)·U`.
pub fn apply_unitary_update(u: &CMatrix, k: &CMatrix, eta: f64) -> Result<CMatrix> {
    let defect = linalg::hermitian_defect(k);
    if defect > HERMITIAN_CHECK {
        return Err(TrainError::NotHermitian { defect });
    }
    if k.nrows() != u.nrows() {
        return Err(QuantumError::DimensionMismatch { expected: u.nrows(), actual: k.nrows() }.into());
    }
    Ok(linalg::expm_i_hermitian(k, eta) * u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, regularization: 1.0, epochs: 200, seed: 0 }
    }
}

/// Stop once the combined Frobenius norm of all `K` drops below this.
pub const GRADIENT_STOP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub network: UnitaryNetwork,
    /// Fidelity before training followed by the value after each update.
    pub fidelity_history: Vec<f64>,
    /// Worst unitarity defect of any gate seen during training.
    pub max_unitary_defect: f64,
    pub converged: bool,
}

/// Repeated commutator updates on all gates simultaneously.
pub fn train_commutator(
    network: &UnitaryNetwork,
    batch: &[(DensityOperator, TargetProjector)],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(TrainError::InvalidConfig("learning rate must be positive".into()));
    }
    let mut net = network.clone();
    let mut history = vec![net.fidelity(batch)?];
    let mut max_defect = net.gate_matrices().map(linalg::unitary_defect).fold(0.0, f64::max);
    let mut converged = false;
    for _ in 0..cfg.epochs {
        let updates = commutator_update_matrices(batch, &net, cfg.regularization)?;
        let norm: f64 = updates.iter().map(|u| u.k.norm_squared()).sum::<f64>().sqrt();
        if norm < GRADIENT_STOP {
            converged = true;
            break;
        }
        for up in &updates {
            let gate = &mut net.layers[up.layer].gates[up.gate];
            gate.matrix = apply_unitary_update(&gate.matrix, &up.k, cfg.learning_rate)?;
            max_defect = max_defect.max(linalg::unitary_defect(&gate.matrix));
        }
        history.push(net.fidelity(batch)?);
    }
    Ok(TrainReport { network: net, fidelity_history: history, max_unitary_defect: max_defect, converged })
}
