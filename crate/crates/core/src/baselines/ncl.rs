use nalgebra::DVector;

use super::l1ball::l1_ball_project;
use crate::error::{param_err, Result};
use crate::linalg::spectral_radius;
use crate::surrogate::SurrogatePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Fixed step `1 / ||sigma_hat||_2`.
    FixedInverseSpectral,
    /// Start from the fixed step and halve until the quadratic upper model holds.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NclParams {
    /// l1-ball radius `R0`.
    pub radius: f64,
    pub step_rule: StepRule,
    pub max_iters: usize,
    /// Relative objective change that ends the iteration.
    pub tol: f64,
}

impl Default for NclParams {
    fn default() -> Self {
        Self { radius: 1.0, step_rule: StepRule::FixedInverseSpectral, max_iters: 2000, tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct NclFit {
    pub beta: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub step: f64,
    /// Whether power iteration met its tolerance.
    pub spectral_converged: bool,
    /// Accepted steps that raised the objective.
    pub ascent_steps: usize,
    pub objective: f64,
}

fn objective(pair: &SurrogatePair, beta: &DVector<f64>) -> f64 {
    0.5 * beta.dot(&(&pair.sigma_hat * beta)) - pair.xi_hat.dot(beta)
}

/// Projected gradient on `1/2 b^T sigma_hat b - xi_hat^T b` over `||b||_1 <= R0`, from zero.
pub fn ncl_fit(pair: &SurrogatePair, params: &NclParams) -> Result<NclFit> {
    if !(params.radius >= 0.0) || !params.radius.is_finite() {
        return Err(param_err(format!("radius = {} must be nonnegative", params.radius)));
    }
    let p = pair.p();
    let (norm, spectral_converged) = spectral_radius(&pair.sigma_hat, 1000, 1e-10);
    let base_step = if norm > 0.0 { 1.0 / norm } else { 1.0 };
    let mut beta = DVector::zeros(p);
    let mut f = 0.0;
    let mut converged = false;
    let mut ascent = 0;
    let mut iters = 0;

    if params.radius == 0.0 {
        return Ok(NclFit {
            beta,
            iterations: 0,
            converged: true,
            step: base_step,
            spectral_converged,
            ascent_steps: 0,
            objective: 0.0,
        });
    }

    while iters < params.max_iters {
        iters += 1;
        let grad = &pair.sigma_hat * &beta - &pair.xi_hat;
        let (next, f_next) = match params.step_rule {
            StepRule::FixedInverseSpectral => {
                let next = l1_ball_project(&(&beta - &grad * base_step), params.radius);
                let fn_ = objective(pair, &next);
                (next, fn_)
            }
            StepRule::Backtracking => {
                let mut t = base_step;
                loop {
                    let next = l1_ball_project(&(&beta - &grad * t), params.radius);
                    let d = &next - &beta;
                    let fn_ = objective(pair, &next);
                    if fn_ <= f + grad.dot(&d) + d.norm_squared() / (2.0 * t) || t < 1e-12 {
                        break (next, fn_);
                    }
                    t *= 0.5;
                }
            }
        };
        if f_next > f {
            ascent += 1;
        }
        let change = (f_next - f).abs();
        beta = next;
        let f_old = f;
        f = f_next;
        if change <= params.tol * (1.0 + f_old.abs()) {
            converged = true;
            break;
        }
    }
    if ascent > 0 {
        log::debug!("NCL: {ascent} ascent steps on an indefinite surrogate");
    }
    Ok(NclFit {
        beta,
        iterations: iters,
        converged,
        step: base_step,
        spectral_converged,
        ascent_steps: ascent,
        objective: f,
    })
}
