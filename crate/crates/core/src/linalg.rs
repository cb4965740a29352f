//! Dense symmetric kernels shared by the calibration and ADMM code.
//!
//! Matrices travel as `nalgebra::DMatrix<f64>`; the O(p^3) eigendecomposition
//! and the `P diag(d) P^T` reconstruction run on faer.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

thread_local! {
    static EIGEN_CALLS: Cell<usize> = const { Cell::new(0) };
}

/// Number of symmetric eigendecompositions performed on the current thread.
pub fn eigendecomposition_count() -> usize {
    EIGEN_CALLS.with(|c| c.get())
}

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors stored column-wise, matching `values`.
    pub vectors: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Symmetric eigendecomposition. Only the lower triangle is read.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let p = m.nrows();
    if p != m.ncols() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    EIGEN_CALLS.with(|c| c.set(c.get() + 1));
    if p == 0 {
        return Ok(SymmetricEigen { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) });
    }
    let fm = to_faer(m);
    let eig = fm.self_adjoint_eigen(faer::Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    // faer returns ascending order; flip to descending.
    let values = DVector::from_fn(p, |i, _| s[p - 1 - i]);
    let vectors = DMatrix::from_fn(p, p, |i, j| u[(i, p - 1 - j)]);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalues".into()));
    }
    Ok(SymmetricEigen { values, vectors })
}

/// `P diag(d) P^T`, returned exactly symmetric.
pub fn reconstruct(vectors: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let p = vectors.nrows();
    let k = vectors.ncols();
    let fp = to_faer(vectors);
    let scaled = faer::Mat::from_fn(p, k, |i, j| fp[(i, j)] * d[j]);
    let prod = &scaled * fp.transpose();
    let mut out = from_faer(prod.as_ref());
    symmetrize_in_place(&mut out);
    out
}

/// Replace `m` by `(m + m^T) / 2`.
pub fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let p = m.nrows();
    for j in 0..p {
        for i in (j + 1)..p {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Dense `A^T A` via faer.
pub fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    let fa = to_faer(a);
    let prod = fa.transpose() * &fa;
    let mut out = from_faer(prod.as_ref());
    symmetrize_in_place(&mut out);
    out
}

/// Elementwise max norm.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Solve `a x = b` for a symmetric positive definite `a` by Cholesky.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a.clone().cholesky().ok_or_else(|| Error::Cholesky("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Largest absolute eigenvalue by power iteration on `m^2`.
///
/// Returns the estimate and whether the iteration met the tolerance.
pub fn spectral_radius(m: &DMatrix<f64>, max_iters: usize, tol: f64) -> (f64, bool) {
    let p = m.nrows();
    if p == 0 {
        return (0.0, true);
    }
    // Deterministic start with no special alignment to coordinate axes.
    let mut v = DVector::from_fn(p, |i, _| 1.0 + (i as f64 * 0.618_033_988_749_895).fract());
    let nrm = v.norm();
    v /= nrm;
    let mut est = 0.0;
    for _ in 0..max_iters {
        let w = m * (m * &v);
        let nw = w.norm();
        if nw == 0.0 {
            return (0.0, true);
        }
        let next = nw.sqrt();
        v = w / nw;
        if (next - est).abs() <= tol * next.max(1e-300) {
            return (next, true);
        }
        est = next;
    }
    (est, false)
}
