//! Max-norm nearest positive definite matrix
//!
//! ```text
//! min ||B||_max   s.t.  W - B = sigma_hat,  W ⪰ eps I
//! ```
//!
//! by ADMM with step length `tau` in `(1, (1 + sqrt 5) / 2)`. The B-update uses
//! the Moreau decomposition `prox_f(G) = G - Pi_{ball/mu}(G)` for
//! `f = ||.||_max / mu`, whose conjugate ball is the elementwise l1 ball.

use nalgebra::DMatrix;

use super::l1ball::matrix_l1_ball_project;
use crate::calibration::psd_project_matrix;
use crate::error::{param_err, Result};
use crate::linalg::max_abs;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AdmmParams {
    /// Initial penalty; adjusted every `mu_adjust_every` iterations.
    pub mu: f64,
    pub tau_step: f64,
    pub tol_pinf: f64,
    pub tol_dinf: f64,
    /// Bound on `gap_weight * |eps_gap|`.
    pub tol_gap_scaled: f64,
    pub gap_weight: f64,
    pub max_iters: usize,
    pub mu_adjust_every: usize,
}

impl Default for AdmmParams {
    fn default() -> Self {
        Self {
            mu: 0.25,
            tau_step: 1.618,
            tol_pinf: 1e-4,
            tol_dinf: 1e-4,
            tol_gap_scaled: 1e-4,
            gap_weight: 1e-3,
            max_iters: 5000,
            mu_adjust_every: 50,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        let golden = (5f64.sqrt() + 1.0) / 2.0;
        if !(self.tau_step > 1.0 && self.tau_step < golden) {
            return Err(param_err(format!("tau_step = {} must lie in (1, {golden})", self.tau_step)));
        }
        if !(self.mu > 0.0) {
            return Err(param_err("mu must be positive"));
        }
        if self.max_iters == 0 {
            return Err(param_err("max_iters must be positive"));
        }
        Ok(())
    }
}

/// Residuals after one ADMM iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmResiduals {
    /// `||mu (B+ - B) + (1/tau - 1)(Gamma+ - Gamma)||_F / (1 + ||sigma_hat||_F)`.
    pub pinf: f64,
    /// `||Gamma+ - Gamma||_F / (tau mu (1 + ||sigma_hat||_F))`, the constraint violation.
    pub dinf: f64,
    /// Relative primal-dual gap, signed.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct AdmmDiagnostics {
    pub iterations: usize,
    pub residuals: AdmmResiduals,
    pub converged: bool,
    /// `||W - sigma_hat||_max` at the returned `W`.
    pub objective: f64,
    pub mu_final: f64,
}

/// ADMM iterate `(W, B, Gamma)` together with the fixed problem data.
#[derive(Debug, Clone)]
pub struct NearestPdAdmm<'a> {
    sigma_hat: &'a DMatrix<f64>,
    eps_hat: f64,
    params: AdmmParams,
    pub w: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
    pub mu: f64,
    shifted: DMatrix<f64>,
    scale: f64,
    iter: usize,
}

/// Quantities of one B-update, exposed for checking the Moreau decomposition.
#[derive(Debug, Clone)]
pub struct BUpdate {
    pub g: DMatrix<f64>,
    pub projection: DMatrix<f64>,
}

impl<'a> NearestPdAdmm<'a> {
    pub fn new(sigma_hat: &'a DMatrix<f64>, eps_hat: f64, params: AdmmParams) -> Result<Self> {
        params.validate()?;
        if !(eps_hat > 0.0) {
            return Err(param_err("eps_hat must be positive"));
        }
        let p = sigma_hat.nrows();
        if sigma_hat.ncols() != p {
            return Err(param_err("sigma_hat must be square"));
        }
        let mut shifted = sigma_hat.clone();
        for i in 0..p {
            shifted[(i, i)] -= eps_hat;
        }
        Ok(Self {
            sigma_hat,
            eps_hat,
            params,
            w: sigma_hat.clone(),
            b: DMatrix::zeros(p, p),
            gamma: DMatrix::zeros(p, p),
            mu: params.mu,
            shifted,
            scale: 1.0 + sigma_hat.norm(),
            iter: 0,
        })
    }

    /// Resume from an earlier iterate (same dimension).
    pub fn warm_start(&mut self, w: &DMatrix<f64>, b: &DMatrix<f64>, gamma: &DMatrix<f64>, mu: f64) {
        self.w = w.clone();
        self.b = b.clone();
        self.gamma = gamma.clone();
        self.mu = mu;
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }

    /// One ADMM sweep: W-update, B-update, multiplier step.
    pub fn step(&mut self) -> Result<(AdmmResiduals, BUpdate)> {
        let mu = self.mu;
        let tau = self.params.tau_step;
        let target = &self.b - &self.gamma / mu + self.sigma_hat;
        self.w = psd_project_matrix(&target, self.eps_hat)?;

        let g = &self.w + &self.gamma / mu - self.sigma_hat;
        let projection = matrix_l1_ball_project(&g, 1.0 / mu);
        let b_new = &g - &projection;

        let resid = &self.w - &b_new - self.sigma_hat;
        let gamma_new = &self.gamma + resid * (tau * mu);

        let d_gamma = &gamma_new - &self.gamma;
        let pinf = ((&b_new - &self.b) * mu + &d_gamma * (1.0 / tau - 1.0)).norm() / self.scale;
        let dinf = d_gamma.norm() / (tau * mu * self.scale);
        let primal = max_abs(&b_new);
        let dual = gamma_new.dot(&self.shifted);
        let gap = (primal + dual) / 1f64.max(0.5 * (primal.abs() + dual.abs()));

        self.b = b_new;
        self.gamma = gamma_new;
        self.iter += 1;
        Ok((AdmmResiduals { pinf, dinf, gap }, BUpdate { g, projection }))
    }

    fn satisfied(&self, r: &AdmmResiduals) -> bool {
        r.pinf <= self.params.tol_pinf
            && r.dinf <= self.params.tol_dinf
            && self.params.gap_weight * r.gap.abs() <= self.params.tol_gap_scaled
    }

    /// Rebalance `mu` by the ratio of the two infeasibilities.
    fn adjust_mu(&mut self, r: &AdmmResiduals) {
        if r.dinf > 10.0 * r.pinf {
            self.mu *= 2.0;
        } else if r.pinf > 10.0 * r.dinf {
            self.mu /= 2.0;
        }
    }

    /// Iterate until the stopping rule or the iteration cap.
    pub fn run(&mut self) -> Result<AdmmDiagnostics> {
        self.run_observed(|_, _, _| {})
    }

    /// [`run`](Self::run), handing every iteration's residuals and B-update to `observe`.
    pub fn run_observed(
        &mut self,
        mut observe: impl FnMut(&Self, &AdmmResiduals, &BUpdate),
    ) -> Result<AdmmDiagnostics> {
        let mut last = AdmmResiduals { pinf: f64::INFINITY, dinf: f64::INFINITY, gap: f64::INFINITY };
        let mut converged = false;
        let start = self.iter;
        while self.iter - start < self.params.max_iters {
            let (r, upd) = self.step()?;
            observe(self, &r, &upd);
            last = r;
            if self.satisfied(&r) {
                converged = true;
                break;
            }
            let every = self.params.mu_adjust_every;
            if every > 0 && (self.iter - start) % every == 0 {
                self.adjust_mu(&r);
            }
        }
        Ok(AdmmDiagnostics {
            iterations: self.iter - start,
            residuals: last,
            converged,
            objective: max_abs(&(&self.w - self.sigma_hat)),
            mu_final: self.mu,
        })
    }
}

/// Max-norm nearest matrix to `sigma_hat` with all eigenvalues at least `eps_hat`.
pub fn nearest_pd_maxnorm(
    sigma_hat: &DMatrix<f64>,
    eps_hat: f64,
    params: &AdmmParams,
) -> Result<(DMatrix<f64>, AdmmDiagnostics)> {
    let mut admm = NearestPdAdmm::new(sigma_hat, eps_hat, *params)?;
    let diag = admm.run()?;
    Ok((admm.w, diag))
}
