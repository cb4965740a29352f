//! Batch driver: seeded replications, per-method corrected CV, metrics and CSV output.

mod config;
mod cv;
mod metrics;
mod output;
pub mod presets;

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

pub use config::{
    default_alpha_grid, parse_methods, CvConfig, CvScore, ExperimentConfig, Method, ScenarioEntry, SolverSettings,
};
pub use cv::{corrected_cv, fold_assignment, penalty, CvOutcome, FullData};
pub use metrics::{metrics, Metrics};
pub use output::{aggregate, write_outputs, AggregateRow, OutputPaths};

use crate::baselines::{cocolasso_calibrate, cocolasso_lasso, ncl_fit, NclParams};
use crate::calibration::calibrate_with_policy;
use crate::diagnostics::{theory_report, TheoryReport};
use crate::error::{Error, Result};
use crate::gep::{fit, GepConfig};
use crate::simulation::{derive_seed, generate, rng_from_seed, Dataset, ScenarioSpec};

/// Result of one method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scenario_index: usize,
    pub spec: ScenarioSpec,
    pub n: usize,
    pub method: Method,
    pub rep_index: usize,
    pub rmse_rel: f64,
    pub nc: usize,
    pub nic: usize,
    pub nnz: usize,
    /// NaN for methods without CV.
    pub alpha_star: f64,
    pub lambda_used: f64,
    pub wall_time_ms: f64,
    pub converged: bool,
    /// Error message when the replication failed.
    pub failure: Option<String>,
    pub diagnostics: Option<DiagnosticsRow>,
}

/// Scalar summary of a [`TheoryReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub d_max: f64,
    pub eps_tilde_inf: f64,
    pub eps_ls_inf: f64,
    pub eps_dagger_inf: f64,
    pub kappa_hat: f64,
    pub bound_thm2: f64,
    pub irrepresentable: f64,
}

impl From<&TheoryReport> for DiagnosticsRow {
    fn from(r: &TheoryReport) -> Self {
        Self {
            d_max: r.d_max,
            eps_tilde_inf: r.eps_tilde_inf,
            eps_ls_inf: r.eps_ls_inf,
            eps_dagger_inf: r.eps_dagger_inf,
            kappa_hat: r.kappa_hat.unwrap_or(f64::NAN),
            bound_thm2: r.bound_thm2.unwrap_or(f64::NAN),
            irrepresentable: r.irrepresentable,
        }
    }
}

/// Estimate, tuning outcome and convergence of one method.
#[derive(Debug, Clone)]
pub struct MethodFit {
    pub beta: DVector<f64>,
    pub alpha_star: f64,
    pub lambda: f64,
    pub converged: bool,
}

/// Tune (where applicable) and fit `method` on a dataset. NCL uses `R0 = ||beta_star||_1`.
pub fn fit_method(
    ds: &Dataset,
    method: Method,
    cv: &CvConfig,
    solver: &SolverSettings,
    cv_seed: u64,
) -> Result<MethodFit> {
    let model = ds.error_model();
    let pair = model.surrogate(&ds.z, &ds.y)?;
    match method {
        Method::Caznrls => {
            let cal = calibrate_with_policy(&pair, solver.eps)?;
            let out = corrected_cv(&ds.z, &ds.y, &model, FullData::Caznrls(&cal), cv, solver, cv_seed)?;
            let cfg = GepConfig { lambda: out.lambda, ..solver.gep.clone() };
            let f = fit(&cal, &cfg)?;
            Ok(MethodFit {
                converged: f.all_inner_converged(),
                beta: f.beta_final,
                alpha_star: out.alpha_star,
                lambda: out.lambda,
            })
        }
        Method::Cocolasso => {
            let eps = calibrate_with_policy(&pair, solver.eps)?.eps_hat;
            let cc = cocolasso_calibrate(&pair, eps, &solver.admm, None)?;
            let out = corrected_cv(&ds.z, &ds.y, &model, FullData::Cocolasso(&cc), cv, solver, cv_seed)?;
            let sol = cocolasso_lasso(&cc, out.lambda, &solver.gep.alm, None)?;
            Ok(MethodFit {
                converged: cc.admm.converged && sol.converged,
                beta: sol.beta,
                alpha_star: out.alpha_star,
                lambda: out.lambda,
            })
        }
        Method::Ncl => {
            let params = NclParams { radius: ds.beta_star.iter().map(|b| b.abs()).sum(), ..solver.ncl };
            let f = ncl_fit(&pair, &params)?;
            Ok(MethodFit { beta: f.beta, alpha_star: f64::NAN, lambda: 0.0, converged: f.converged })
        }
    }
}

fn diagnostics_row(ds: &Dataset, solver: &SolverSettings, lambda: f64, seed: u64) -> Result<DiagnosticsRow> {
    let pair = ds.error_model().surrogate(&ds.z, &ds.y)?;
    let cal = calibrate_with_policy(&pair, solver.eps)?;
    let mut rng = rng_from_seed(seed);
    let report = theory_report(ds, &pair, &cal, lambda, 200, &mut rng)?;
    Ok(DiagnosticsRow::from(&report))
}

/// Seed of dataset replication `rep` of a scenario.
pub fn replication_seed(base_seed: u64, spec: &ScenarioSpec, rep: usize) -> u64 {
    derive_seed(base_seed ^ spec.seed, rep as u64)
}

/// All method records of one `(scenario, replication)` unit, in method order.
pub fn run_replication(
    cfg: &ExperimentConfig,
    scenario_index: usize,
    spec: &ScenarioSpec,
    rep: usize,
) -> Vec<MetricsRecord> {
    let seed = replication_seed(cfg.base_seed, spec, rep);
    let rep_spec = ScenarioSpec { seed, ..spec.clone() };
    let n = rep_spec.sample_size();
    let dataset = generate(&rep_spec);
    let cv_seed = derive_seed(seed, 0xC0DE);

    cfg.methods
        .iter()
        .map(|&method| {
            let mut rec = MetricsRecord {
                scenario_index,
                spec: rep_spec.clone(),
                n,
                method,
                rep_index: rep,
                rmse_rel: f64::NAN,
                nc: 0,
                nic: 0,
                nnz: 0,
                alpha_star: f64::NAN,
                lambda_used: f64::NAN,
                wall_time_ms: 0.0,
                converged: false,
                failure: None,
                diagnostics: None,
            };
            let ds = match &dataset {
                Ok(ds) => ds,
                Err(e) => {
                    rec.failure = Some(e.to_string());
                    return rec;
                }
            };
            let start = Instant::now();
            let result = fit_method(ds, method, &cfg.cv, &cfg.solver, cv_seed)
                .and_then(|f| metrics(&f.beta, &ds.beta_star, cfg.solver.zero_threshold).map(|m| (f, m)));
            if cfg.timing {
                rec.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            }
            match result {
                Ok((f, m)) => {
                    rec.rmse_rel = m.rmse_rel;
                    rec.nc = m.nc;
                    rec.nic = m.nic;
                    rec.nnz = m.nnz;
                    rec.alpha_star = f.alpha_star;
                    rec.lambda_used = f.lambda;
                    rec.converged = f.converged;
                }
                Err(e) => {
                    log::warn!("scenario {scenario_index} rep {rep} {method}: {e}");
                    rec.failure = Some(e.to_string());
                }
            }
            if cfg.diagnostics {
                let lambda = if rec.lambda_used.is_finite() && rec.lambda_used > 0.0 {
                    rec.lambda_used
                } else {
                    cfg.cv.lambda_floor
                };
                match diagnostics_row(ds, &cfg.solver, lambda, derive_seed(seed, 0xD1A6)) {
                    Ok(d) => rec.diagnostics = Some(d),
                    Err(e) => log::warn!("diagnostics failed: {e}"),
                }
            }
            rec
        })
        .collect()
}

/// Run every `(scenario, replication)` unit. Output order is scenario, replication,
/// method regardless of `cfg.jobs`.
pub fn run_records(cfg: &ExperimentConfig) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let specs = cfg.specs();
    let units: Vec<(usize, usize)> =
        (0..specs.len()).flat_map(|k| (cfg.rep_start..cfg.rep_start + cfg.replications).map(move |r| (k, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let nested: Vec<Vec<MetricsRecord>> =
        pool.install(|| units.par_iter().map(|&(k, r)| run_replication(cfg, k, &specs[k], r)).collect());
    Ok(nested.into_iter().flatten().collect())
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<MetricsRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub paths: OutputPaths,
}

impl ExperimentOutcome {
    /// Records that failed or did not converge.
    pub fn problem_count(&self) -> usize {
        self.records.iter().filter(|r| !r.converged).count()
    }
}

/// Run the experiment and write its CSV files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let records = run_records(cfg)?;
    let aggregates = aggregate(&records);
    let paths = write_outputs(cfg, &records, &aggregates)?;
    Ok(ExperimentOutcome { records, aggregates, paths })
}
