//! Small dense complex linear-algebra helpers shared by the simulator.
//!
//! Qubit ordering is big-endian throughout the crate: qubit 0 is the most
//! significant bit of a basis index, so `|q0 q1 … q_{n-1}⟩` maps to index
//! `q0·2^{n-1} + … + q_{n-1}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Bit of `qubit` in basis index `index` for an `n`-qubit register.
#[inline]
pub fn bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

#[inline]
pub fn mask(qubit: usize, n: usize) -> usize {
    1 << (n - 1 - qubit)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a·b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitary_defect(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitary_defect(u) <= tol
}

/// `(X + X†)/2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// `exp(i·t·H)` for Hermitian `H`, via the spectral decomposition so the
/// result is unitary to machine precision.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::from_polar(1.0, t * v)),
    ));
    &vectors * phases * vectors.adjoint()
}

/// Lift a `2^k × 2^k` operator acting on `targets` (in the listed order, the
/// first target being the most significant local bit) to the full `n`-qubit
/// register.
pub fn embed(local: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let k = targets.len();
    let target_mask: usize = targets.iter().map(|&t| mask(t, n)).sum();
    let mut full = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let local_col = local_index(col, targets, n);
        let rest = col & !target_mask;
        for local_row in 0..(1usize << k) {
            let amp = local[(local_row, local_col)];
            if amp == ZERO {
                continue;
            }
            let row = rest | scatter(local_row, targets, n);
            full[(row, col)] = amp;
        }
    }
    full
}

/// Extract the local index formed by the bits of `targets` in `index`.
#[inline]
pub fn local_index(index: usize, targets: &[usize], n: usize) -> usize {
    let mut out = 0;
    for &t in targets {
        out = (out << 1) | bit(index, t, n);
    }
    out
}

/// Inverse of [`local_index`]: place local bits back at their qubit positions.
#[inline]
pub fn scatter(local: usize, targets: &[usize], n: usize) -> usize {
    let k = targets.len();
    let mut out = 0;
    for (pos, &t) in targets.iter().enumerate() {
        if (local >> (k - 1 - pos)) & 1 == 1 {
            out |= mask(t, n);
        }
    }
    out
}

/// Apply a local operator to a state vector in place.
pub fn apply_local(amplitudes: &mut [Complex64], local: &CMatrix, targets: &[usize], n: usize) {
    let k = targets.len();
    let sub = 1usize << k;
    let target_mask: usize = targets.iter().map(|&t| mask(t, n)).sum();
    let offsets: Vec<usize> = (0..sub).map(|l| scatter(l, targets, n)).collect();
    let mut buf = vec![ZERO; sub];
    for base in 0..amplitudes.len() {
        if base & target_mask != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amplitudes[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, v) in buf.iter().enumerate() {
                acc += local[(r, c)] * v;
            }
            amplitudes[base | off] = acc;
        }
    }
}

/// Operator (Frobenius-free) max-entry distance, used in tests and checks.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
