//! Frobenius-nearest positive definite calibration of a surrogate and the
//! calibrated least-squares pair built from the same eigendecomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{param_err, Result};
use crate::linalg::{reconstruct, sym_eigen};
use crate::surrogate::SurrogatePair;

/// How the eigenvalue floor `eps_hat` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum EpsPolicy {
    /// `eps_hat = factor * max(1, theta_1)` with `theta_1` the top eigenvalue.
    Relative(f64),
    /// A fixed floor.
    Absolute(f64),
}

impl Default for EpsPolicy {
    fn default() -> Self {
        EpsPolicy::Relative(1e-2)
    }
}

impl EpsPolicy {
    pub fn resolve(&self, top_eigenvalue: f64) -> f64 {
        match *self {
            EpsPolicy::Relative(f) => f * top_eigenvalue.max(1.0),
            EpsPolicy::Absolute(v) => v,
        }
    }
}

/// The calibrated design and response.
///
/// `z_tilde` is the `p x p` matrix `sqrt(n) P diag(sqrt(max(theta_i, eps))) P^T`, so
/// `sigma_tilde = z_tilde^T z_tilde / n` and `xi_hat = z_tilde^T y_tilde / n`.
#[derive(Debug, Clone)]
pub struct CalibratedPair {
    pub z_tilde: DMatrix<f64>,
    pub y_tilde: DVector<f64>,
    pub sigma_tilde: DMatrix<f64>,
    /// Eigenvalues of the surrogate, descending.
    pub eigvals: DVector<f64>,
    pub eigvecs: DMatrix<f64>,
    pub eps_hat: f64,
    pub n: usize,
}

impl CalibratedPair {
    pub fn p(&self) -> usize {
        self.y_tilde.len()
    }

    /// `||z_tilde^T y_tilde||_inf / n`, the smallest uniform penalty giving a zero lasso fit.
    pub fn lambda_max(&self) -> f64 {
        let c = self.z_tilde.tr_mul(&self.y_tilde);
        c.amax() / self.n as f64
    }

    /// `(1/(2n)) ||z_tilde beta - y_tilde||^2`.
    pub fn loss(&self, beta: &DVector<f64>) -> f64 {
        let r = &self.z_tilde * beta - &self.y_tilde;
        0.5 * r.norm_squared() / self.n as f64
    }
}

/// Projection of `sigma_hat` onto `{W : W ⪰ eps_hat I}` in the Frobenius norm.
///
/// Returns the projection together with the eigenvalues (descending) and
/// eigenvectors of the input.
pub fn psd_project(sigma_hat: &DMatrix<f64>, eps_hat: f64) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    if !(eps_hat > 0.0) || !eps_hat.is_finite() {
        return Err(param_err(format!("eps_hat = {eps_hat} must be positive")));
    }
    let eig = sym_eigen(sigma_hat)?;
    let clamped = eig.values.map(|t| t.max(eps_hat));
    let w = reconstruct(&eig.vectors, &clamped);
    Ok((w, eig.values, eig.vectors))
}

/// [`psd_project`] returning only the matrix, assembled as a low-rank
/// correction over whichever eigenvalue group (above or below `eps_hat`) is smaller.
pub fn psd_project_matrix(m: &DMatrix<f64>, eps_hat: f64) -> Result<DMatrix<f64>> {
    if !(eps_hat > 0.0) || !eps_hat.is_finite() {
        return Err(param_err(format!("eps_hat = {eps_hat} must be positive")));
    }
    let eig = sym_eigen(m)?;
    let p = m.nrows();
    let above: Vec<usize> = (0..p).filter(|&i| eig.values[i] > eps_hat).collect();
    let below: Vec<usize> = (0..p).filter(|&i| eig.values[i] < eps_hat).collect();
    let mut w = if below.len() <= above.len() {
        // W = M + sum_{theta < eps} (eps - theta) v v^T
        let coef = DVector::from_iterator(below.len(), below.iter().map(|&i| eps_hat - eig.values[i]));
        m + low_rank(&eig.vectors.select_columns(&below), &coef)
    } else {
        // W = eps I + sum_{theta > eps} (theta - eps) v v^T
        let coef = DVector::from_iterator(above.len(), above.iter().map(|&i| eig.values[i] - eps_hat));
        let mut w = low_rank(&eig.vectors.select_columns(&above), &coef);
        for i in 0..p {
            w[(i, i)] += eps_hat;
        }
        w
    };
    crate::linalg::symmetrize_in_place(&mut w);
    Ok(w)
}

fn low_rank(vectors: &DMatrix<f64>, coef: &DVector<f64>) -> DMatrix<f64> {
    if vectors.ncols() == 0 {
        return DMatrix::zeros(vectors.nrows(), vectors.nrows());
    }
    reconstruct(vectors, coef)
}

/// Build the calibrated pair with an explicit floor.
pub fn calibrate(pair: &SurrogatePair, eps_hat: f64) -> Result<CalibratedPair> {
    let (sigma_tilde, eigvals, eigvecs) = psd_project(&pair.sigma_hat, eps_hat)?;
    Ok(assemble(pair, sigma_tilde, eigvals, eigvecs, eps_hat))
}

/// Build the calibrated pair, resolving the floor from the surrogate's spectrum.
///
/// Performs a single eigendecomposition, like [`calibrate`].
pub fn calibrate_with_policy(pair: &SurrogatePair, policy: EpsPolicy) -> Result<CalibratedPair> {
    let eig = sym_eigen(&pair.sigma_hat)?;
    let top = if eig.values.is_empty() { 0.0 } else { eig.values[0] };
    let eps_hat = policy.resolve(top);
    if !(eps_hat > 0.0) || !eps_hat.is_finite() {
        return Err(param_err(format!("eps_hat = {eps_hat} must be positive")));
    }
    let clamped = eig.values.map(|t| t.max(eps_hat));
    let sigma_tilde = reconstruct(&eig.vectors, &clamped);
    Ok(assemble(pair, sigma_tilde, eig.values, eig.vectors, eps_hat))
}

fn assemble(
    pair: &SurrogatePair,
    sigma_tilde: DMatrix<f64>,
    eigvals: DVector<f64>,
    eigvecs: DMatrix<f64>,
    eps_hat: f64,
) -> CalibratedPair {
    let root_n = (pair.n as f64).sqrt();
    let sqrt_clamped = eigvals.map(|t| t.max(eps_hat).sqrt());
    let z_tilde = reconstruct(&eigvecs, &(&sqrt_clamped * root_n));
    // y_tilde = sqrt(n) P diag(1/sqrt(max)) P^T xi_hat
    let coords = eigvecs.tr_mul(&pair.xi_hat).component_div(&sqrt_clamped) * root_n;
    let y_tilde = &eigvecs * coords;
    CalibratedPair { z_tilde, y_tilde, sigma_tilde, eigvals, eigvecs, eps_hat, n: pair.n }
}
