use nalgebra::{DMatrix, DVector};

use super::admm::{AdmmDiagnostics, AdmmParams, NearestPdAdmm};
use crate::error::{Error, Result};
use crate::surrogate::SurrogatePair;
use crate::wls::{self, AlmParams, WeightedLassoProblem, WeightedLassoSolution};

/// Design and response built from the Cholesky factor of the max-norm calibration.
#[derive(Debug, Clone)]
pub struct CocoCalibrated {
    pub sigma_bar: DMatrix<f64>,
    /// `sqrt(n) L^T` with `sigma_bar = L L^T`.
    pub z_bar: DMatrix<f64>,
    /// Solves `z_bar^T y_bar = n xi_hat`.
    pub y_bar: DVector<f64>,
    pub n: usize,
    pub admm: AdmmDiagnostics,
    /// Final ADMM iterate `(B, Gamma, mu)`, kept for warm starts.
    pub admm_state: (DMatrix<f64>, DMatrix<f64>, f64),
}

impl CocoCalibrated {
    pub fn lambda_max(&self) -> f64 {
        self.z_bar.tr_mul(&self.y_bar).amax() / self.n as f64
    }
}

/// Max-norm calibration followed by the Cholesky construction of `(z_bar, y_bar)`.
///
/// `warm` seeds the ADMM with an earlier `(W, B, Gamma, mu)` of the same size.
pub fn cocolasso_calibrate(
    pair: &SurrogatePair,
    eps_hat: f64,
    params: &AdmmParams,
    warm: Option<&CocoCalibrated>,
) -> Result<CocoCalibrated> {
    let mut admm = NearestPdAdmm::new(&pair.sigma_hat, eps_hat, *params)?;
    if let Some(w) = warm {
        if w.sigma_bar.nrows() == pair.p() {
            admm.warm_start(&w.sigma_bar, &w.admm_state.0, &w.admm_state.1, w.admm_state.2);
        }
    }
    let diag = admm.run()?;
    if !diag.converged {
        log::debug!("max-norm ADMM stopped after {} iterations without meeting tolerance", diag.iterations);
    }
    let sigma_bar = admm.w.clone();
    let chol = sigma_bar.clone().cholesky().ok_or_else(|| {
        Error::Cholesky(format!(
            "max-norm calibration is not positive definite (ADMM {} iterations, residuals {:?})",
            diag.iterations, diag.residuals
        ))
    })?;
    let l = chol.l();
    let root_n = (pair.n as f64).sqrt();
    let z_bar = l.transpose() * root_n;
    let y_bar = l
        .solve_lower_triangular(&(&pair.xi_hat * root_n))
        .ok_or_else(|| Error::Singular("Cholesky factor is singular".into()))?;
    Ok(CocoCalibrated { sigma_bar, z_bar, y_bar, n: pair.n, admm: diag, admm_state: (admm.b, admm.gamma, admm.mu) })
}

/// Uniform-weight lasso `min 1/(2n) ||y_bar - z_bar beta||^2 + lambda ||beta||_1`.
pub fn cocolasso_lasso(
    cc: &CocoCalibrated,
    lambda: f64,
    alm: &AlmParams,
    warm: Option<&WeightedLassoSolution>,
) -> Result<WeightedLassoSolution> {
    let omega = DVector::from_element(cc.z_bar.ncols(), cc.n as f64 * lambda);
    let prob = WeightedLassoProblem::new(&cc.z_bar, &cc.y_bar, omega)?;
    wls::solve(&prob, alm, warm)
}

/// CoCoLasso estimate for penalty `lambda`.
pub fn cocolasso_fit(
    pair: &SurrogatePair,
    eps_hat: f64,
    admm_params: &AdmmParams,
    lambda: f64,
    alm: &AlmParams,
) -> Result<DVector<f64>> {
    let cc = cocolasso_calibrate(pair, eps_hat, admm_params, None)?;
    Ok(cocolasso_lasso(&cc, lambda, alm, None)?.beta)
}
