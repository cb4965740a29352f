//! CSV outputs. Every file starts with a `#` line carrying the schema version
//! and the configuration hash, then a header row.

use std::fmt::Write as _;
use std::path::PathBuf;

use super::{ExperimentConfig, Method, MetricsRecord};
use crate::error::Result;
use crate::simulation::{Corruption, ExampleId};

pub const SCHEMA: &str = "caznrls-csv-v1";

/// Per `(scenario, method)` means over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scenario_index: usize,
    pub example_id: ExampleId,
    pub corruption: Corruption,
    pub p: usize,
    pub s: usize,
    pub n: usize,
    pub alpha: f64,
    pub tau: f64,
    pub sigma_noise: f64,
    pub method: Method,
    pub reps: usize,
    pub failed: usize,
    pub mean_rmse: f64,
    pub mean_nc: f64,
    pub mean_nic: f64,
    pub mean_nnz: f64,
    pub mean_alpha_star: f64,
    pub mean_time_ms: f64,
    pub converged_fraction: f64,
}

/// Means over successful records, grouped by scenario then method (first-seen order).
pub fn aggregate(records: &[MetricsRecord]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, Method)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.scenario_index, r.method)) {
            keys.push((r.scenario_index, r.method));
        }
    }
    keys.sort_by_key(|&(k, m)| (k, records.iter().position(|r| r.scenario_index == k && r.method == m)));
    keys.into_iter()
        .map(|(k, m)| {
            let group: Vec<&MetricsRecord> =
                records.iter().filter(|r| r.scenario_index == k && r.method == m).collect();
            let ok: Vec<&&MetricsRecord> = group.iter().filter(|r| r.failure.is_none()).collect();
            let cnt = ok.len() as f64;
            let mean = |f: &dyn Fn(&MetricsRecord) -> f64| -> f64 {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / cnt
                }
            };
            let first = group[0];
            AggregateRow {
                scenario_index: k,
                example_id: first.spec.example_id,
                corruption: first.spec.corruption(),
                p: first.spec.p,
                s: first.spec.s,
                n: first.n,
                alpha: first.spec.alpha,
                tau: first.spec.tau,
                sigma_noise: first.spec.sigma_noise,
                method: m,
                reps: group.len(),
                failed: group.len() - ok.len(),
                mean_rmse: mean(&|r| r.rmse_rel),
                mean_nc: mean(&|r| r.nc as f64),
                mean_nic: mean(&|r| r.nic as f64),
                mean_nnz: mean(&|r| r.nnz as f64),
                mean_alpha_star: mean(&|r| r.alpha_star),
                mean_time_ms: mean(&|r| r.wall_time_ms),
                converged_fraction: group.iter().filter(|r| r.converged).count() as f64 / group.len() as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub aggregate: PathBuf,
    /// One file per method.
    pub plotdata: Vec<(Method, PathBuf)>,
}

fn header_line(cfg: &ExperimentConfig) -> String {
    format!("# {SCHEMA} config_hash={:016x} cv_tuned_per_method=true\n", cfg.config_hash())
}

const RECORD_COLUMNS: &str = "scenario,example_id,corruption,p,s,n,alpha,tau,sigma_noise,method,seed,rep_index,rmse_rel,nc,nic,nnz,alpha_star,lambda_used,wall_time_ms,converged,error";
const DIAG_COLUMNS: &str =
    ",d_max,eps_tilde_inf,eps_ls_inf,eps_dagger_inf,kappa_hat_upper_estimate,bound_thm2,irrepresentable";

fn clean_message(s: &str) -> String {
    s.chars().map(|c| if c == ',' || c == '\n' || c == '\r' { ';' } else { c }).collect()
}

pub fn records_csv(cfg: &ExperimentConfig, records: &[MetricsRecord]) -> String {
    let mut out = header_line(cfg);
    out.push_str(RECORD_COLUMNS);
    if cfg.diagnostics {
        out.push_str(DIAG_COLUMNS);
    }
    out.push('\n');
    for r in records {
        let sp = &r.spec;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario_index,
            sp.example_id,
            sp.corruption(),
            sp.p,
            sp.s,
            r.n,
            sp.alpha,
            sp.tau,
            sp.sigma_noise,
            r.method,
            sp.seed,
            r.rep_index,
            r.rmse_rel,
            r.nc,
            r.nic,
            r.nnz,
            r.alpha_star,
            r.lambda_used,
            r.wall_time_ms,
            r.converged,
            r.failure.as_deref().map(clean_message).unwrap_or_default(),
        );
        if cfg.diagnostics {
            match &r.diagnostics {
                Some(d) => {
                    let _ = write!(
                        out,
                        ",{},{},{},{},{},{},{}",
                        d.d_max,
                        d.eps_tilde_inf,
                        d.eps_ls_inf,
                        d.eps_dagger_inf,
                        d.kappa_hat,
                        d.bound_thm2,
                        d.irrepresentable
                    );
                }
                None => out.push_str(",,,,,,,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(cfg: &ExperimentConfig, rows: &[AggregateRow]) -> String {
    let mut out = header_line(cfg);
    out.push_str("scenario,example_id,corruption,p,s,n,alpha,tau,sigma_noise,method,reps,failed,mean_rmse,mean_nc,mean_nic,mean_nnz,mean_alpha_star,mean_time_ms,converged_fraction\n");
    for a in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            a.scenario_index,
            a.example_id,
            a.corruption,
            a.p,
            a.s,
            a.n,
            a.alpha,
            a.tau,
            a.sigma_noise,
            a.method,
            a.reps,
            a.failed,
            a.mean_rmse,
            a.mean_nc,
            a.mean_nic,
            a.mean_nnz,
            a.mean_alpha_star,
            a.mean_time_ms,
            a.converged_fraction
        );
    }
    out
}

/// Curves over `alpha` for one method: one row per scenario, scenarios in config order.
pub fn plotdata_csv(cfg: &ExperimentConfig, rows: &[AggregateRow], method: Method) -> String {
    let mut out = header_line(cfg);
    out.push_str("example_id,corruption,p,tau,sigma_noise,alpha,mean_rmse,mean_nc,mean_nic,mean_time\n");
    for a in rows.iter().filter(|a| a.method == method) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            a.example_id,
            a.corruption,
            a.p,
            a.tau,
            a.sigma_noise,
            a.alpha,
            a.mean_rmse,
            a.mean_nc,
            a.mean_nic,
            a.mean_time_ms
        );
    }
    out
}

pub fn write_outputs(cfg: &ExperimentConfig, records: &[MetricsRecord], rows: &[AggregateRow]) -> Result<OutputPaths> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let base = |suffix: &str| cfg.out_dir.join(format!("{}_{suffix}.csv", cfg.name));
    let paths = OutputPaths {
        records: base("records"),
        aggregate: base("aggregate"),
        plotdata: cfg.methods.iter().map(|&m| (m, base(&format!("plotdata_{m}")))).collect(),
    };
    std::fs::write(&paths.records, records_csv(cfg, records))?;
    std::fs::write(&paths.aggregate, aggregate_csv(cfg, rows))?;
    for (m, path) in &paths.plotdata {
        std::fs::write(path, plotdata_csv(cfg, rows, *m))?;
    }
    Ok(paths)
}
