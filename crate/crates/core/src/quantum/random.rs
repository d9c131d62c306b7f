//! Seeded random states, operators and unitaries for tests and initialization.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::DensityOperator;
use super::linalg::{self, CMatrix};
use super::state::QuantumState;

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase fix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> QuantumState {
    let v = ginibre(1 << qubits, 1, rng);
    let norm = v.norm();
    QuantumState::from_raw(v.iter().map(|a| a / norm).collect())
}

/// Full-rank mixed state `GG†/Tr(GG†)`.
pub fn random_density<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityOperator {
    let d = 1 << qubits;
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityOperator::from_raw(linalg::hermitize(&m.scale(1.0 / tr)))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    linalg::hermitize(&ginibre(dim, dim, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(linalg::is_unitary(&random_unitary(8, &mut rng), 1e-12));
        assert!((random_state(3, &mut rng).norm() - 1.0).abs() < 1e-12);
        assert!(DensityOperator::new(random_density(2, &mut rng).into_matrix()).is_ok());
        assert!(linalg::is_hermitian(&random_hermitian(4, &mut rng), 0.0));
    }
}
