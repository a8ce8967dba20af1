//! Dense complex linear-algebra helpers shared across modules.
//!
//! All system matrices in this crate are dense `DMatrix<Complex64>` values of
//! dimension at most a few hundred, so plain eigendecomposition-based matrix
//! functions are both simple and fast enough.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for operators, unitaries and density matrices.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector used for state amplitudes.
pub type CVector = DVector<Complex64>;

/// Complex zero.
pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Complex one.
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
/// Imaginary unit.
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Identity matrix of dimension `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest absolute value of any entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |M - M^dagger|` over all entries.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let mut res = 0.0_f64;
    for i in 0..m.nrows() {
        for k in i..m.ncols() {
            res = res.max((m[(i, k)] - m[(k, i)].conj()).norm());
        }
    }
    res
}

/// Errors unless `m` is Hermitian within `tol * max(1, |m|_max)`.
pub fn require_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = max_abs(m).max(1.0);
    let residual = hermiticity_residual(m);
    if residual > tol * scale {
        return Err(Error::NotHermitian {
            residual,
            tol: tol * scale,
        });
    }
    Ok(())
}

/// `max |U^dagger U - I|` over all entries.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let gram = u.adjoint() * u;
    let n = gram.nrows();
    let mut res = 0.0_f64;
    for i in 0..n {
        for k in 0..n {
            let expected = if i == k { C_ONE } else { C_ZERO };
            res = res.max((gram[(i, k)] - expected).norm());
        }
    }
    res
}

/// Errors unless `u` is unitary within `tol`.
pub fn require_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let residual = unitarity_residual(u);
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    Ok(())
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order together with the matching orthonormal eigenvector columns.
///
/// The caller is responsible for `h` being Hermitian; only the numerical
/// decomposition (which reads the full matrix) is performed here.
pub fn hermitian_eigen(h: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    // nalgebra does not guarantee eigenvalue ordering; sort ascending.
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `exp(-i H t)` for Hermitian `H`, via eigendecomposition
/// `V diag(exp(-i lambda t)) V^dagger`.
pub fn exp_neg_i_h_t(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    exp_neg_i_from_eigen(&values, &vectors, t)
}

/// Same as [`exp_neg_i_h_t`] but reusing a precomputed eigendecomposition.
pub fn exp_neg_i_from_eigen(values: &DVector<f64>, vectors: &CMatrix, t: f64) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for col in 0..n {
        let phase = Complex64::from_polar(1.0, -values[col] * t);
        for row in 0..n {
            scaled[(row, col)] *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// `Re tr(a b)` without forming the product matrix.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0_f64;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}
