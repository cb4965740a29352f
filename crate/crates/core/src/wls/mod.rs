//! Weighted l1-regularized least squares
//!
//! ```text
//! min_beta  1/2 ||Z beta - y||^2 + sum_i omega_i |beta_i|
//! ```
//!
//! solved through its dual
//!
//! ```text
//! min_{zeta, eta}  1/2 ||zeta||^2 + <y, zeta> + delta_[-omega, omega](eta)   s.t.  Z^T zeta - eta = 0
//! ```
//!
//! by an inexact augmented Lagrangian method whose subproblems are minimized
//! with a semismooth Newton-CG method. With the augmented Lagrangian
//! `L(zeta, eta; x) = ... + <x, Z^T zeta - eta> + mu/2 ||Z^T zeta - eta||^2`
//! the multiplier `x` converges to `-beta`; solutions report `beta = -x`.

mod newton;

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, param_err, Result};

pub use newton::{semismooth_newton, NewtonOutcome};

/// One weighted lasso instance. `z` is `m x p`, `y` has length `m`, `omega` length `p`.
#[derive(Debug, Clone)]
pub struct WeightedLassoProblem<'a> {
    pub z: &'a DMatrix<f64>,
    pub y: &'a DVector<f64>,
    pub omega: DVector<f64>,
}

impl<'a> WeightedLassoProblem<'a> {
    pub fn new(z: &'a DMatrix<f64>, y: &'a DVector<f64>, omega: DVector<f64>) -> Result<Self> {
        if z.nrows() != y.len() {
            return Err(dim_err(format!("design has {} rows but response has length {}", z.nrows(), y.len())));
        }
        if z.ncols() != omega.len() {
            return Err(dim_err(format!("design has {} columns but {} weights", z.ncols(), omega.len())));
        }
        if omega.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(param_err("weights must be finite and nonnegative"));
        }
        Ok(Self { z, y, omega })
    }

    pub fn p(&self) -> usize {
        self.omega.len()
    }

    /// `1/2 ||Z beta - y||^2 + sum omega_i |beta_i|`.
    pub fn primal_objective(&self, beta: &DVector<f64>) -> f64 {
        let r = self.z * beta - self.y;
        0.5 * r.norm_squared() + self.omega.iter().zip(beta.iter()).map(|(w, b)| w * b.abs()).sum::<f64>()
    }

    /// `1/2 ||zeta||^2 + <y, zeta>`; the indicator term vanishes for the projected `eta`.
    pub fn dual_objective(&self, zeta: &DVector<f64>) -> f64 {
        0.5 * zeta.norm_squared() + self.y.dot(zeta)
    }

    /// Largest violation of the primal optimality conditions,
    /// `||beta - soft(beta - Z^T(Z beta - y), omega)||_inf`, relative to `1 + ||Z^T y||_inf`.
    pub fn kkt_violation(&self, beta: &DVector<f64>) -> f64 {
        let g = self.z.tr_mul(&(self.z * beta - self.y));
        let scale = 1.0 + self.z.tr_mul(self.y).amax();
        let mut worst = 0.0_f64;
        for i in 0..self.p() {
            let t = beta[i] - g[i];
            let s = t.signum() * (t.abs() - self.omega[i]).max(0.0);
            worst = worst.max((beta[i] - s).abs());
        }
        worst / scale
    }
}

/// Parameters of the semismooth Newton-CG inner solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NewtonParams {
    /// Cap on the CG residual target.
    pub theta: f64,
    /// Exponent bonus in the CG residual target `||g||^(1 + varsigma)`.
    pub varsigma: f64,
    /// Backtracking factor.
    pub delta: f64,
    /// Armijo sufficient-decrease constant.
    pub rho_ls: f64,
    pub max_newton_iters: usize,
    pub max_cg_iters: usize,
    /// Use a direct Woodbury solve when at most this many coordinates are
    /// outside the box; CG otherwise. Zero forces CG.
    pub direct_max: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            theta: 0.1,
            varsigma: 0.5,
            delta: 0.5,
            rho_ls: 0.25,
            max_newton_iters: 50,
            max_cg_iters: 200,
            direct_max: 300,
        }
    }
}

impl NewtonParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.theta) || !unit(self.varsigma) || !unit(self.delta) {
            return Err(param_err("theta, varsigma and delta must lie in (0, 1)"));
        }
        if !(self.rho_ls > 0.0 && self.rho_ls < 0.5) {
            return Err(param_err("rho_ls must lie in (0, 1/2)"));
        }
        if self.max_newton_iters == 0 || self.max_cg_iters == 0 {
            return Err(param_err("iteration caps must be positive"));
        }
        Ok(())
    }
}

/// Parameters of the augmented Lagrangian outer loop.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AlmParams {
    pub mu0: f64,
    pub mu_growth: f64,
    pub mu_max: f64,
    pub tol: f64,
    pub max_alm_iters: usize,
    pub newton: NewtonParams,
}

impl Default for AlmParams {
    fn default() -> Self {
        Self { mu0: 1.0, mu_growth: 2.5, mu_max: 1e8, tol: 1e-8, max_alm_iters: 200, newton: NewtonParams::default() }
    }
}

impl AlmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0) || !(self.mu_max >= self.mu0) || !(self.mu_growth >= 1.0) {
            return Err(param_err("need mu0 > 0, mu_growth >= 1, mu_max >= mu0"));
        }
        if !(self.tol > 0.0) || self.max_alm_iters == 0 {
            return Err(param_err("tol and max_alm_iters must be positive"));
        }
        self.newton.validate()
    }
}

/// Primal-dual answer of one weighted lasso solve.
#[derive(Debug, Clone)]
pub struct WeightedLassoSolution {
    pub beta: DVector<f64>,
    pub zeta: DVector<f64>,
    /// Dual auxiliary, always inside `[-omega, omega]`.
    pub eta: DVector<f64>,
    /// `max(eps_pinf, eps_dinf, eps_gap)` at termination.
    pub kkt_residual: f64,
    pub alm_iters: usize,
    pub newton_iters_total: usize,
    pub cg_iters_total: usize,
    pub converged: bool,
    /// Penalty parameter at termination.
    pub mu: f64,
}

/// Projection onto the box `[-omega, omega]` and the diagonal of the chosen
/// generalized Jacobian (1 strictly inside, 0 on the boundary and outside).
pub fn box_project(h: &DVector<f64>, omega: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let proj = DVector::from_fn(h.len(), |i, _| h[i].clamp(-omega[i], omega[i]));
    let jac = DVector::from_fn(h.len(), |i, _| if h[i].abs() < omega[i] { 1.0 } else { 0.0 });
    (proj, jac)
}

/// Value and gradient of the reduced augmented Lagrangian
/// `Phi(zeta) = mu/2 ||Pi(h) - h||^2 + 1/2 ||zeta||^2 + <y, zeta>`, `h = Z^T zeta + x / mu`.
#[derive(Debug, Clone)]
pub struct PhiEval {
    pub value: f64,
    pub grad: DVector<f64>,
    pub h: DVector<f64>,
}

/// Evaluate `Phi` at `zeta` for multiplier `multiplier` and penalty `mu`.
pub fn phi_value_grad(
    zeta: &DVector<f64>,
    multiplier: &DVector<f64>,
    mu: f64,
    prob: &WeightedLassoProblem<'_>,
) -> PhiEval {
    let h = prob.z.tr_mul(zeta) + multiplier / mu;
    let (value, grad) = phi_from_h(zeta, &h, mu, prob);
    PhiEval { value, grad, h }
}

/// Excess of `h` over the box, `h - Pi(h)`, i.e. soft thresholding.
pub(crate) fn box_excess(h: &DVector<f64>, omega: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(h.len(), |i, _| {
        let a = h[i].abs() - omega[i];
        if a > 0.0 {
            a * h[i].signum()
        } else {
            0.0
        }
    })
}

pub(crate) fn phi_value_from_h(zeta: &DVector<f64>, h: &DVector<f64>, mu: f64, prob: &WeightedLassoProblem<'_>) -> f64 {
    let mut excess_sq = 0.0;
    for i in 0..h.len() {
        let a = h[i].abs() - prob.omega[i];
        if a > 0.0 {
            excess_sq += a * a;
        }
    }
    0.5 * mu * excess_sq + 0.5 * zeta.norm_squared() + prob.y.dot(zeta)
}

pub(crate) fn phi_from_h(
    zeta: &DVector<f64>,
    h: &DVector<f64>,
    mu: f64,
    prob: &WeightedLassoProblem<'_>,
) -> (f64, DVector<f64>) {
    let value = phi_value_from_h(zeta, h, mu, prob);
    let excess = box_excess(h, &prob.omega);
    let mut grad = prob.y + zeta;
    for (i, &e) in excess.iter().enumerate() {
        if e != 0.0 {
            grad.axpy(mu * e, &prob.z.column(i), 1.0);
        }
    }
    (value, grad)
}

/// Solve a weighted lasso by the semismooth Newton augmented Lagrangian method.
///
/// A `warm` solution seeds both the multiplier and the dual iterate. When
/// `max_alm_iters` is exhausted the last iterate is returned with
/// `converged = false`.
pub fn solve(
    prob: &WeightedLassoProblem<'_>,
    params: &AlmParams,
    warm: Option<&WeightedLassoSolution>,
) -> Result<WeightedLassoSolution> {
    params.validate()?;
    let p = prob.p();
    let m = prob.y.len();
    let (mut x, mut zeta) = match warm {
        Some(w) if w.beta.len() == p && w.zeta.len() == m => (-&w.beta, w.zeta.clone()),
        Some(_) => return Err(dim_err("warm start has mismatched dimensions")),
        None => (DVector::zeros(p), DVector::zeros(m)),
    };
    let scale = 1.0 + prob.y.norm();
    let floor = 0.5 * params.tol * scale;
    let mut mu = params.mu0;

    let mut dinf_prev = f64::INFINITY;
    let mut gap_prev = f64::INFINITY;
    let mut newton_total = 0;
    let mut cg_total = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iters = 0;
    let mut eta = DVector::zeros(p);
    let mut beta = -&x;

    for j in 0..params.max_alm_iters {
        iters = j + 1;
        let delta_j = 0.5_f64.powi(j as i32);
        let target = delta_j * 0.1_f64.min(dinf_prev.max(gap_prev));
        let stop_norm = target.max(floor);

        let out = semismooth_newton(prob, &x, mu, &zeta, &params.newton, stop_norm);
        newton_total += out.iters;
        cg_total += out.cg_iters;
        zeta = out.zeta;

        let h = prob.z.tr_mul(&zeta) + &x / mu;
        let (proj, _) = box_project(&h, &prob.omega);
        let x_new = (&h - &proj) * mu;
        eta = proj;

        let pinf = out.grad_norm / scale;
        let dinf = (&x_new - &x).norm() / (mu * scale);
        beta = -&x_new;
        let primal = prob.primal_objective(&beta);
        let dual = prob.dual_objective(&zeta);
        let gap = (primal + dual).abs() / (1.0 + primal.abs());
        x = x_new;

        residual = pinf.max(dinf).max(gap);
        if residual <= params.tol {
            converged = true;
            break;
        }
        if dinf > 0.6 * dinf_prev {
            mu = (mu * params.mu_growth).min(params.mu_max);
        }
        dinf_prev = dinf;
        gap_prev = gap;
    }

    if converged {
        if let Some(b) = polish(prob, &beta, params.newton.direct_max) {
            beta = b;
        }
    }

    Ok(WeightedLassoSolution {
        beta,
        zeta,
        eta,
        kkt_residual: residual,
        alm_iters: iters,
        newton_iters_total: newton_total,
        cg_iters_total: cg_total,
        converged,
        mu,
    })
}

/// Re-solve the optimality conditions on the support of `beta` with its signs fixed.
/// Returns the refined point only if it keeps the signs and lowers the KKT violation.
fn polish(prob: &WeightedLassoProblem<'_>, beta: &DVector<f64>, max_support: usize) -> Option<DVector<f64>> {
    let thr = 1e-10 * beta.amax().max(1.0);
    let support: Vec<usize> = (0..beta.len()).filter(|&i| beta[i].abs() > thr).collect();
    if support.is_empty() || support.len() > max_support || support.len() > prob.y.len() {
        return None;
    }
    let zj = prob.z.select_columns(&support);
    let rhs = DVector::from_iterator(
        support.len(),
        support.iter().map(|&i| prob.z.column(i).dot(prob.y) - prob.omega[i] * beta[i].signum()),
    );
    let sol = zj.tr_mul(&zj).cholesky()?.solve(&rhs);
    let mut out = DVector::zeros(beta.len());
    for (k, &i) in support.iter().enumerate() {
        if sol[k].signum() != beta[i].signum() {
            return None;
        }
        out[i] = sol[k];
    }
    (prob.kkt_violation(&out) <= prob.kkt_violation(beta)).then_some(out)
}
