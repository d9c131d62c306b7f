use serde::{Deserialize, Serialize};

use super::{Result, TrainError};
use crate::quantum::density::DensityOperator;
use crate::quantum::linalg::{self, CMatrix};
use crate::quantum::{QuantumError, QuantumState};

const PROJECTOR_TOLERANCE: f64 = 1e-10;

/// Hermitian operator with spectrum in `[0, 1]` encoding a desired output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetProjector(CMatrix);

impl TargetProjector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let defect = linalg::hermitian_defect(&matrix);
        if defect > PROJECTOR_TOLERANCE {
            return Err(QuantumError::NotHermitian { defect }.into());
        }
        let eig = linalg::hermitian_eigenvalues(&matrix);
        let (lo, hi) = (eig[0], eig[eig.len() - 1]);
        if lo < -PROJECTOR_TOLERANCE || hi > 1.0 + PROJECTOR_TOLERANCE {
            return Err(QuantumError::InvalidDensity { reason: format!("target spectrum [{lo}, {hi}] outside [0, 1]") }
                .into());
        }
        Ok(Self(matrix))
    }

    pub fn pure(state: &QuantumState) -> Self {
        Self(state.projector())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostMode {
    MaximizeFidelity,
    MinimizeInfidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCostConfig {
    pub targets: Vec<TargetProjector>,
    pub mode: CostMode,
}

/// Mean fidelity `(1/N) Σ Tr(P_x ρ_x)`, or `1 −` that in minimization mode.
pub fn fidelity_cost(outputs: &[DensityOperator], cfg: &FidelityCostConfig) -> Result<f64> {
    if outputs.len() != cfg.targets.len() {
        return Err(TrainError::LengthMismatch { what: "outputs vs targets", expected: cfg.targets.len(), actual: outputs.len() });
    }
    if outputs.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let mut total = 0.0;
    for (rho, p) in outputs.iter().zip(&cfg.targets) {
        if rho.dim() != p.0.nrows() {
            return Err(QuantumError::DimensionMismatch { expected: p.0.nrows(), actual: rho.dim() }.into());
        }
        total += linalg::trace_product(&p.0, rho.matrix()).re;
    }
    let fidelity = total / outputs.len() as f64;
    Ok(match cfg.mode {
        CostMode::MaximizeFidelity => fidelity,
        CostMode::MinimizeInfidelity => 1.0 - fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(i: usize) -> DensityOperator {
        DensityOperator::from_state(&QuantumState::basis(1, i).unwrap())
    }

    fn cfg(targets: &[usize]) -> FidelityCostConfig {
        FidelityCostConfig {
            targets: targets.iter().map(|&i| TargetProjector::pure(&QuantumState::basis(1, i).unwrap())).collect(),
            mode: CostMode::MaximizeFidelity,
        }
    }

    #[test]
    fn examples() {
        assert!((fidelity_cost(&[basis(0)], &cfg(&[0])).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity_cost(&[basis(1)], &cfg(&[0])).unwrap().abs() < 1e-15);
        assert!((fidelity_cost(&[basis(0), basis(1)], &cfg(&[0, 0])).unwrap() - 0.5).abs() < 1e-15);
        let mut c = cfg(&[0]);
        c.mode = CostMode::MinimizeInfidelity;
        assert!(fidelity_cost(&[basis(0)], &c).unwrap().abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(fidelity_cost(&[basis(0)], &cfg(&[0, 1])), Err(TrainError::LengthMismatch { .. })));
        assert_eq!(fidelity_cost(&[], &cfg(&[])), Err(TrainError::EmptyBatch));
        let two = DensityOperator::maximally_mixed(2);
        assert!(matches!(fidelity_cost(&[two], &cfg(&[0])), Err(TrainError::Quantum(_))));
        assert!(TargetProjector::new(linalg::identity(2).scale(2.0)).is_err());
    }
}
