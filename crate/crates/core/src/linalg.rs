//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues in descending
/// order. Ties keep the solver's original index order.
pub fn hermitian_eigen_desc(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())).max(1.0);
    let defect = hermitian_defect(a);
    if defect > 1e-8 * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (asymmetry {defect:e})"
        )));
    }
    // Symmetrize exactly so the solver sees a Hermitian input.
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(a.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn trace_re(a: &CMat) -> f64 {
    a.trace().re
}

/// `Re tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
pub fn hpd_inverse(a: &CMat) -> Option<CMat> {
    a.clone().cholesky().map(|c| c.inverse())
}

/// `‖A‖_F`.
pub fn fro(a: &CMat) -> f64 {
    a.norm()
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `‖A^H A − I‖_max`.
pub fn orthonormality_defect(a: &CMat) -> f64 {
    let g = a.adjoint() * a;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}
