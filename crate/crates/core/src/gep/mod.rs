//! Multi-stage convex relaxation of the calibrated zero-norm problem.
//!
//! Each stage solves a weighted lasso on the calibrated pair with weights
//! `n lambda (1 - w^{k-1})`, then refreshes the penalty parameter `rho_k` and the
//! dual weights `w^k` in closed form.

mod penalty;

use nalgebra::DVector;

use crate::calibration::CalibratedPair;
use crate::error::{param_err, Result};
use crate::wls::{self, AlmParams, WeightedLassoProblem, WeightedLassoSolution};

pub use penalty::{phi, psi_conjugate, rho_schedule, scad_penalty_via_conjugate, w_update};

/// Outer-loop configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GepConfig {
    /// Shape parameter of `phi`, must exceed 1.
    pub a: f64,
    pub lambda: f64,
    /// Initial dual weights in `[0, 1/2]`; `None` means all zero.
    pub w0: Option<Vec<f64>>,
    pub k_max: usize,
    pub rho_cap: f64,
    pub stop_nnz_delta: usize,
    pub stop_loss_delta: f64,
    pub nnz_threshold: f64,
    pub alm: AlmParams,
}

impl Default for GepConfig {
    fn default() -> Self {
        Self {
            a: 6.0,
            lambda: 0.1,
            w0: None,
            k_max: 4,
            rho_cap: 1e8,
            stop_nnz_delta: 5,
            stop_loss_delta: 0.1,
            nnz_threshold: 1e-8,
            alm: AlmParams::default(),
        }
    }
}

impl GepConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.a > 1.0) {
            return Err(param_err(format!("a = {} must exceed 1", self.a)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(param_err(format!("lambda = {} must be positive", self.lambda)));
        }
        if self.k_max == 0 {
            return Err(param_err("k_max must be at least 1"));
        }
        if let Some(w0) = &self.w0 {
            if w0.len() != p {
                return Err(param_err(format!("w0 has length {} but p = {p}", w0.len())));
            }
            if w0.iter().any(|&w| !(0.0..=0.5).contains(&w)) {
                return Err(param_err("w0 entries must lie in [0, 1/2]"));
            }
        }
        self.alm.validate()
    }
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Support size and loss settled over the last stages.
    Stability,
    KMax,
}

/// One stage of the relaxation.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub beta: DVector<f64>,
    pub w: DVector<f64>,
    pub rho: f64,
    /// `(1/(2n)) ||z_tilde beta - y_tilde||^2`.
    pub loss: f64,
    pub nnz: usize,
    pub inner_converged: bool,
    pub inner_kkt: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta_final: DVector<f64>,
    /// Indices with `|beta_i| > nnz_threshold`.
    pub support: Vec<usize>,
    pub iterates: Vec<StageRecord>,
    pub stages_run: usize,
    pub stopped_by: StopReason,
    /// First-stage (plain weighted lasso) solution, reusable as a warm start.
    pub first_stage: WeightedLassoSolution,
}

impl FitResult {
    /// True when every inner solve met its tolerance.
    pub fn all_inner_converged(&self) -> bool {
        self.iterates.iter().all(|s| s.inner_converged)
    }
}

pub fn nnz(beta: &DVector<f64>, threshold: f64) -> usize {
    beta.iter().filter(|b| b.abs() > threshold).count()
}

/// Run the multi-stage relaxation on a calibrated pair.
pub fn fit(cal: &CalibratedPair, cfg: &GepConfig) -> Result<FitResult> {
    fit_warm(cal, cfg, None)
}

/// [`fit`] with the first stage warm-started from an earlier weighted lasso solution.
pub fn fit_warm(cal: &CalibratedPair, cfg: &GepConfig, warm: Option<&WeightedLassoSolution>) -> Result<FitResult> {
    let p = cal.p();
    cfg.validate(p)?;
    let n = cal.n as f64;
    let mut w = match &cfg.w0 {
        Some(w0) => DVector::from_column_slice(w0),
        None => DVector::zeros(p),
    };
    let mut rho = 1.0;
    let mut iterates: Vec<StageRecord> = Vec::with_capacity(cfg.k_max);
    let mut prev: Option<WeightedLassoSolution> = warm.cloned();
    let mut stopped_by = StopReason::KMax;
    let mut first_stage = None;

    for k in 1..=cfg.k_max {
        let omega = w.map(|wi| n * cfg.lambda * (1.0 - wi));
        let prob = WeightedLassoProblem::new(&cal.z_tilde, &cal.y_tilde, omega)?;
        let sol = wls::solve(&prob, &cfg.alm, prev.as_ref())?;
        if !sol.converged {
            log::debug!("stage {k}: inner solver stopped at residual {:.3e}", sol.kkt_residual);
        }
        let beta = sol.beta.clone();
        rho = rho_schedule(k, &beta, rho, cfg.rho_cap);
        w = w_update(&beta, rho, cfg.a);
        iterates.push(StageRecord {
            loss: cal.loss(&beta),
            nnz: nnz(&beta, cfg.nnz_threshold),
            beta,
            w: w.clone(),
            rho,
            inner_converged: sol.converged,
            inner_kkt: sol.kkt_residual,
        });
        if first_stage.is_none() {
            first_stage = Some(sol.clone());
        }
        prev = Some(sol);

        if is_stable(&iterates, cfg) {
            stopped_by = StopReason::Stability;
            break;
        }
    }

    let last = iterates.last().expect("at least one stage runs");
    let beta_final = last.beta.clone();
    let support = (0..p).filter(|&i| beta_final[i].abs() > cfg.nnz_threshold).collect();
    Ok(FitResult {
        beta_final,
        support,
        stages_run: iterates.len(),
        iterates,
        stopped_by,
        first_stage: first_stage.expect("at least one stage runs"),
    })
}

/// Support-size changes over the last three stage transitions are within
/// `stop_nnz_delta` and the last loss change is within `stop_loss_delta`.
fn is_stable(iterates: &[StageRecord], cfg: &GepConfig) -> bool {
    let k = iterates.len();
    if k < 4 {
        return false;
    }
    let nnz_ok = (0..3).all(|j| {
        let a = iterates[k - 1 - j].nnz;
        let b = iterates[k - 2 - j].nnz;
        a.abs_diff(b) <= cfg.stop_nnz_delta
    });
    let loss_ok = (iterates[k - 1].loss - iterates[k - 2].loss).abs() <= cfg.stop_loss_delta;
    nnz_ok && loss_ok
}
