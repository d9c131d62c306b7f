//! Layered parameterized circuits `U(θ) = Π_l Entangle_l · R_l(θ_l)`.

use serde::{Deserialize, Serialize};

use super::error::{QuantumError, Result};
use super::gate::Gate;
use super::linalg::{self, CMatrix};
use super::state::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    None,
    LinearNearestNeighbor,
    /// Linear chain closed back onto qubit 0.
    Ring,
    AllToAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntanglerGate {
    Cnot,
    Cz,
}

impl Topology {
    /// Qubit pairs coupled by one entangler layer.
    pub fn pairs(self, qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Topology::None => Vec::new(),
            Topology::LinearNearestNeighbor => (0..qubits.saturating_sub(1)).map(|k| (k, k + 1)).collect(),
            Topology::Ring => {
                let mut p: Vec<_> = (0..qubits.saturating_sub(1)).map(|k| (k, k + 1)).collect();
                if qubits > 2 {
                    p.push((qubits - 1, 0));
                }
                p
            }
            Topology::AllToAll => {
                let mut p = Vec::new();
                for a in 0..qubits {
                    for b in a + 1..qubits {
                        p.push((a, b));
                    }
                }
                p
            }
        }
    }
}

/// Ordered gate list on a fixed register. Gates are applied first to last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterizedCircuit {
    qubits: usize,
    gates: Vec<Gate>,
    layer_count: usize,
    topology: Topology,
}

impl ParameterizedCircuit {
    /// The identity circuit (no layers).
    pub fn new(qubits: usize) -> Self {
        Self { qubits, gates: Vec::new(), layer_count: 0, topology: Topology::None }
    }

    /// `layers` blocks of one `R_Y` per qubit followed by entanglers on the
    /// topology's pairs. `angles` holds `layers · qubits` values, layer-major.
    pub fn layered(
        qubits: usize,
        layers: usize,
        topology: Topology,
        entangler: EntanglerGate,
        angles: &[f64],
    ) -> Result<Self> {
        if angles.len() != layers * qubits {
            return Err(QuantumError::DimensionMismatch { expected: layers * qubits, actual: angles.len() });
        }
        let mut c = Self { qubits, gates: Vec::new(), layer_count: layers, topology };
        for l in 0..layers {
            for q in 0..qubits {
                c.gates.push(Gate::ry(q, angles[l * qubits + q]));
            }
            for (a, b) in topology.pairs(qubits) {
                c.gates.push(match entangler {
                    EntanglerGate::Cnot => Gate::cnot(a, b),
                    EntanglerGate::Cz => Gate::cz(a, b),
                });
            }
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn with_gate(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn parameter_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_parameterized()).count()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.gates.iter().filter_map(|g| g.parameter).collect()
    }

    /// Index into `gates` of each trainable parameter, in parameter order.
    pub fn parameter_gate_indices(&self) -> Vec<usize> {
        self.gates.iter().enumerate().filter(|(_, g)| g.is_parameterized()).map(|(i, _)| i).collect()
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(QuantumError::DimensionMismatch { expected: self.parameter_count(), actual: values.len() });
        }
        let mut it = values.iter();
        for g in self.gates.iter_mut().filter(|g| g.parameter.is_some()) {
            g.parameter = it.next().copied();
        }
        Ok(())
    }

    pub fn with_parameters(&self, values: &[f64]) -> Result<Self> {
        let mut c = self.clone();
        c.set_parameters(values)?;
        Ok(c)
    }

    /// Copy with parameter `index` moved by `delta`.
    pub fn shifted(&self, index: usize, delta: f64) -> Self {
        let mut c = self.clone();
        let gi = self.parameter_gate_indices()[index];
        let g = &mut c.gates[gi];
        g.parameter = g.parameter.map(|t| t + delta);
        c
    }

    /// Dense `U(θ)` on the full register.
    pub fn unitary(&self) -> CMatrix {
        let mut u = linalg::identity(1 << self.qubits);
        for g in &self.gates {
            u = g.full_matrix(self.qubits) * u;
        }
        u
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        apply_circuit(state, self)
    }
}

/// `U(θ)|ψ⟩`.
pub fn apply_circuit(state: &QuantumState, circuit: &ParameterizedCircuit) -> Result<QuantumState> {
    if state.qubit_count() != circuit.qubits() {
        return Err(QuantumError::DimensionMismatch { expected: circuit.qubits(), actual: state.qubit_count() });
    }
    let mut out = state.clone();
    for g in circuit.gates() {
        out.apply_local(&g.matrix(), &g.targets);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    #[test]
    fn empty_circuit_is_identity() {
        let s = QuantumState::from_amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        assert_eq!(apply_circuit(&s, &ParameterizedCircuit::new(1)).unwrap(), s);
    }

    #[test]
    fn single_ry_half_pi() {
        let c = ParameterizedCircuit::new(1).with_gate(Gate::ry(0, FRAC_PI_2)).unwrap();
        let out = apply_circuit(&QuantumState::zero(1), &c).unwrap();
        for a in out.amplitudes() {
            assert!((a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn cnot_makes_bell_state() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let s = QuantumState::from_amplitudes(vec![h, z, h, z]).unwrap();
        let c = ParameterizedCircuit::new(2).with_gate(Gate::cnot(0, 1)).unwrap();
        let out = apply_circuit(&s, &c).unwrap();
        let expect = [h, z, z, h];
        for (a, e) in out.amplitudes().iter().zip(expect) {
            assert!((a - e).norm() < 1e-12);
        }
    }

    #[test]
    fn statevector_and_dense_unitary_agree() {
        let c = ParameterizedCircuit::layered(3, 2, Topology::Ring, EntanglerGate::Cnot, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
            .unwrap()
            .with_gate(Gate::ccx(2, 0, 1))
            .unwrap();
        let s = QuantumState::basis(3, 5).unwrap();
        let a = apply_circuit(&s, &c).unwrap();
        let u = c.unitary();
        for (i, amp) in a.amplitudes().iter().enumerate() {
            assert!((amp - u[(i, 5)]).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_register() {
        let c = ParameterizedCircuit::new(2);
        assert!(matches!(apply_circuit(&QuantumState::zero(1), &c), Err(QuantumError::DimensionMismatch { .. })));
    }

    #[test]
    fn topology_pairs() {
        assert_eq!(Topology::LinearNearestNeighbor.pairs(3), vec![(0, 1), (1, 2)]);
        assert_eq!(Topology::Ring.pairs(3), vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(Topology::AllToAll.pairs(3).len(), 3);
        assert!(Topology::None.pairs(4).is_empty());
    }
}
