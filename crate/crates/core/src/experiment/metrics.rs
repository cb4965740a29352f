use nalgebra::DVector;

use crate::error::{dim_err, param_err, Result};

/// Recovery metrics of an estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `||beta_f - beta_star|| / ||beta_star||`.
    pub rmse_rel: f64,
    /// Support entries of `beta_star` whose sign is recovered.
    pub nc: usize,
    /// `nnz - nc`.
    pub nic: usize,
    pub nnz: usize,
}

fn sign(v: f64, threshold: f64) -> i8 {
    if v.abs() <= threshold {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Entries with `|v| <= threshold` count as zero, both for `nnz` and for signs.
pub fn metrics(beta_f: &DVector<f64>, beta_star: &DVector<f64>, threshold: f64) -> Result<Metrics> {
    if beta_f.len() != beta_star.len() {
        return Err(dim_err("estimate and truth have different lengths"));
    }
    let norm = beta_star.norm();
    if norm == 0.0 {
        return Err(param_err("beta_star must be nonzero"));
    }
    let nnz = beta_f.iter().filter(|v| v.abs() > threshold).count();
    let nc = (0..beta_star.len())
        .filter(|&i| beta_star[i] != 0.0 && sign(beta_f[i], threshold) == sign(beta_star[i], 0.0))
        .count();
    Ok(Metrics { rmse_rel: (beta_f - beta_star).norm() / norm, nc, nic: nnz.saturating_sub(nc), nnz })
}
