//! Corrected cross-validation for the penalty multiplier.
//!
//! Training folds build their own surrogate and calibration; a fitted `beta`
//! is scored on the held-out fold through the corrected quadratic loss
//! `1/2 b^T S b - <xi_hat_v, b>`. With `S = sigma_hat_v` the loss is unbiased
//! for the clean validation error up to a constant, but a small fold makes
//! `sigma_hat_v` indefinite and the loss unbounded below, which favours weak
//! penalties. The default uses the fold's PSD calibration instead.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use super::config::{CvConfig, CvScore, Method, SolverSettings};
use crate::baselines::{cocolasso_calibrate, cocolasso_lasso, CocoCalibrated};
use crate::calibration::{calibrate_with_policy, CalibratedPair};
use crate::error::{param_err, Error, Result};
use crate::gep::{fit_warm, GepConfig};
use crate::simulation::rng_from_seed;
use crate::surrogate::ErrorModel;
use crate::wls::WeightedLassoSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub alpha_star: f64,
    /// `max(lambda_floor, alpha_star * lambda_max)` on the full data.
    pub lambda: f64,
    /// Mean held-out loss per grid value, in grid order.
    pub scores: Vec<f64>,
}

/// Shuffled, near-equal folds of `0..n`.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    let mut out = vec![Vec::new(); folds];
    for (k, i) in idx.into_iter().enumerate() {
        out[k % folds].push(i);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

fn take_rows(z: &DMatrix<f64>, y: &DVector<f64>, rows: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
    (z.select_rows(rows), y.select_rows(rows))
}

fn held_out_loss(sigma: &DMatrix<f64>, xi: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    0.5 * beta.dot(&(sigma * beta)) - xi.dot(beta)
}

/// Full-data fit objects that CV reuses.
pub enum FullData<'a> {
    Caznrls(&'a CalibratedPair),
    Cocolasso(&'a CocoCalibrated),
}

impl FullData<'_> {
    fn lambda_max(&self) -> f64 {
        match self {
            FullData::Caznrls(c) => c.lambda_max(),
            FullData::Cocolasso(c) => c.lambda_max(),
        }
    }

    fn method(&self) -> Method {
        match self {
            FullData::Caznrls(_) => Method::Caznrls,
            FullData::Cocolasso(_) => Method::Cocolasso,
        }
    }
}

pub fn penalty(alpha: f64, lambda_max: f64, floor: f64) -> f64 {
    floor.max(alpha * lambda_max)
}

/// Select `alpha_star` for `full.method()` by corrected CV over `cv.alpha_grid`.
///
/// Ties go to the earliest grid value. The grid is traversed from large to
/// small multipliers so each fit warm-starts from a sparser one.
pub fn corrected_cv(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    model: &ErrorModel,
    full: FullData<'_>,
    cv: &CvConfig,
    solver: &SolverSettings,
    seed: u64,
) -> Result<CvOutcome> {
    cv.validate()?;
    let n = z.nrows();
    if n / cv.folds < 2 {
        return Err(param_err(format!("{n} rows cannot form {} folds of at least 2 rows", cv.folds)));
    }
    let folds = fold_assignment(n, cv.folds, seed);
    let m = cv.alpha_grid.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| cv.alpha_grid[b].total_cmp(&cv.alpha_grid[a]).then(a.cmp(&b)));

    let mut totals = vec![0.0; m];
    if m > 1 {
        for (v, held) in folds.iter().enumerate() {
            let train: Vec<usize> =
                folds.iter().enumerate().filter(|(k, _)| *k != v).flat_map(|(_, f)| f.iter().copied()).collect();
            let (zt, yt) = take_rows(z, y, &train);
            let (zv, yv) = take_rows(z, y, held);
            let pair_t = model.surrogate(&zt, &yt)?;
            let pair_v = model.surrogate(&zv, &yv)?;
            let cal_t = calibrate_with_policy(&pair_t, solver.eps)?;
            let score_sigma = match cv.score {
                CvScore::Surrogate => pair_v.sigma_hat.clone(),
                CvScore::Calibrated => calibrate_with_policy(&pair_v, solver.eps)?.sigma_tilde,
            };
            match &full {
                FullData::Caznrls(_) => {
                    let mut warm: Option<WeightedLassoSolution> = None;
                    for &k in &order {
                        let cfg = GepConfig {
                            lambda: penalty(cv.alpha_grid[k], cal_t.lambda_max(), cv.lambda_floor),
                            ..solver.gep.clone()
                        };
                        let fit = fit_warm(&cal_t, &cfg, warm.as_ref())?;
                        totals[k] += held_out_loss(&score_sigma, &pair_v.xi_hat, &fit.beta_final);
                        warm = Some(fit.first_stage);
                    }
                }
                FullData::Cocolasso(full_cc) => {
                    let cc_t = cocolasso_calibrate(&pair_t, cal_t.eps_hat, &solver.admm, Some(full_cc))?;
                    let mut warm: Option<WeightedLassoSolution> = None;
                    for &k in &order {
                        let lambda = penalty(cv.alpha_grid[k], cc_t.lambda_max(), cv.lambda_floor);
                        let sol = cocolasso_lasso(&cc_t, lambda, &solver.gep.alm, warm.as_ref())?;
                        totals[k] += held_out_loss(&score_sigma, &pair_v.xi_hat, &sol.beta);
                        warm = Some(sol);
                    }
                }
            }
        }
    }
    let scores: Vec<f64> = totals.iter().map(|t| t / cv.folds as f64).collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Singular(format!("non-finite CV score for {}", full.method())));
    }
    let mut best = 0;
    for k in 1..m {
        if scores[k] < scores[best] {
            best = k;
        }
    }
    let alpha_star = cv.alpha_grid[best];
    Ok(CvOutcome { alpha_star, lambda: penalty(alpha_star, full.lambda_max(), cv.lambda_floor), scores })
}
