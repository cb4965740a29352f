//! Theory quantities on simulated instances. Everything here needs the true
//! coefficients and the clean design, so it is only meaningful for simulations.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::calibration::CalibratedPair;
use crate::error::{dim_err, Error, Result};
use crate::linalg::gram;
use crate::simulation::Dataset;
use crate::surrogate::SurrogatePair;

#[derive(Debug, Clone)]
pub struct TheoryReport {
    /// `||sigma_hat - X^T X / n||_max`.
    pub d_max: f64,
    /// `xi_hat - sigma_tilde beta_star`.
    pub eps_tilde: DVector<f64>,
    pub eps_tilde_inf: f64,
    /// Least squares on the calibrated loss restricted to the true support.
    pub beta_ls: DVector<f64>,
    /// `||xi_hat - sigma_tilde beta_ls||_inf`; zero on the support.
    pub eps_ls_inf: f64,
    /// `sigma_tilde_SS^{-1} eps_tilde_S`, embedded in `R^p`.
    pub eps_dagger: DVector<f64>,
    pub eps_dagger_inf: f64,
    /// Sampled REC value of the clean Gram matrix. An upper estimate of the
    /// true constant, not a certificate.
    pub kappa_hat: Option<f64>,
    /// `5 sqrt(s) lambda / (2 (kappa_hat - 24 s d_max))`, absent when the denominator is not positive.
    pub bound_thm2: Option<f64>,
    /// `||Sigma_{S^c S} Sigma_SS^{-1}||_inf` for the clean Gram matrix.
    pub irrepresentable: f64,
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn complement(p: usize, s: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; p];
    for &i in s {
        mark[i] = true;
    }
    (0..p).filter(|&i| !mark[i]).collect()
}

fn solve_sub(m: &DMatrix<f64>, support: &[usize], rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let a = submatrix(m, support, support);
    let b = DVector::from_iterator(support.len(), support.iter().map(|&i| rhs[i]));
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Singular("restricted calibrated covariance is not positive definite".into()))?;
    Ok(chol.solve(&b))
}

fn embed(p: usize, support: &[usize], v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(p);
    for (k, &i) in support.iter().enumerate() {
        out[i] = v[k];
    }
    out
}

/// Theory report for `(dataset, pair, cal)`; `kappa_samples = 0` skips the REC estimate.
pub fn theory_report(
    ds: &Dataset,
    pair: &SurrogatePair,
    cal: &CalibratedPair,
    lambda: f64,
    kappa_samples: usize,
    rng: &mut impl Rng,
) -> Result<TheoryReport> {
    let p = pair.p();
    if ds.p() != p || cal.p() != p {
        return Err(dim_err("dataset, surrogate and calibration dimensions differ"));
    }
    let s = &ds.support;
    let sigma = gram(&ds.x) / ds.n() as f64;
    let d_max = (&pair.sigma_hat - &sigma).amax();

    let eps_tilde = &pair.xi_hat - &cal.sigma_tilde * &ds.beta_star;
    let eps_tilde_inf = eps_tilde.amax();

    let (beta_ls, eps_dagger) = if s.is_empty() {
        (DVector::zeros(p), DVector::zeros(p))
    } else {
        (
            embed(p, s, &solve_sub(&cal.sigma_tilde, s, &pair.xi_hat)?),
            embed(p, s, &solve_sub(&cal.sigma_tilde, s, &eps_tilde)?),
        )
    };
    let eps_ls = &pair.xi_hat - &cal.sigma_tilde * &beta_ls;
    let eps_ls_inf = eps_ls.amax();

    let kappa_hat = (kappa_samples > 0 && !s.is_empty()).then(|| rec_estimate(&sigma, s, s.len(), kappa_samples, rng));
    let bound_thm2 = kappa_hat.and_then(|k| {
        let denom = k - 24.0 * s.len() as f64 * d_max;
        (denom > 0.0).then(|| 5.0 * (s.len() as f64).sqrt() * lambda / (2.0 * denom))
    });

    Ok(TheoryReport {
        d_max,
        eps_tilde_inf,
        eps_tilde,
        beta_ls,
        eps_ls_inf,
        eps_dagger_inf: eps_dagger.amax(),
        eps_dagger,
        kappa_hat,
        bound_thm2,
        irrepresentable: irrepresentable_number(&sigma, s),
    })
}

/// `||Sigma_{S^c S} Sigma_SS^{-1}||_inf` (max absolute row sum); infinite if `Sigma_SS` is singular.
pub fn irrepresentable_number(sigma: &DMatrix<f64>, support: &[usize]) -> f64 {
    let sc = complement(sigma.nrows(), support);
    if support.is_empty() || sc.is_empty() {
        return 0.0;
    }
    let Some(inv) = submatrix(sigma, support, support).try_inverse() else {
        return f64::INFINITY;
    };
    let m = submatrix(sigma, &sc, support) * inv;
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn rayleigh(sigma: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(sigma * v)) / v.norm_squared()
}

/// Smallest Rayleigh quotient of `sigma` found over sampled directions of the cone
/// `{b : ||b_{S^c}||_1 <= 3 ||b_S||_1}` for supersets `S` of `support` with `|S| <= 1.5 s`.
///
/// Each sample draws a superset, takes the smallest eigenvector of `sigma_SS`
/// (a cone member) and random cone directions around it. Sampling only finds
/// feasible points, so the result is at least the true constant.
pub fn rec_estimate(sigma: &DMatrix<f64>, support: &[usize], s: usize, samples: usize, rng: &mut impl Rng) -> f64 {
    let p = sigma.nrows();
    let max_size = ((1.5 * s as f64).floor() as usize).clamp(support.len().max(1), p);
    let rest = complement(p, support);
    let mut best = f64::INFINITY;
    for _ in 0..samples.max(1) {
        let extra = rng.random_range(0..=(max_size - support.len()).min(rest.len()));
        let mut set: Vec<usize> = support.to_vec();
        set.extend(index::sample(rng, rest.len(), extra).into_iter().map(|k| rest[k]));
        set.sort_unstable();
        if set.is_empty() {
            set.push(rng.random_range(0..p));
        }
        let sub = submatrix(sigma, &set, &set);
        let eig = sub.symmetric_eigen();
        let (imin, &lmin) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        best = best.min(lmin);

        let on_set = embed(p, &set, &eig.eigenvectors.column(imin).into_owned());
        let off = complement(p, &set);
        for _ in 0..4 {
            let mut v = on_set.clone();
            if !off.is_empty() {
                let budget = 3.0 * v.iter().map(|x| x.abs()).sum::<f64>() * rng.random::<f64>();
                let raw: Vec<f64> = off.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let l1: f64 = raw.iter().map(|x| x.abs()).sum();
                if l1 > 0.0 {
                    for (k, &i) in off.iter().enumerate() {
                        v[i] = raw[k] * budget / l1;
                    }
                }
            }
            best = best.min(rayleigh(sigma, &v));
        }
    }
    best
}

/// Sets tracked in the identification analysis:
/// `F = {i : |beta_k_i| - |beta_star_i| >= 1/rho}` and `Lambda = {i : |beta_star_i| <= 4a/((a+1) rho)}`.
pub fn track_sets(beta_k: &DVector<f64>, beta_star: &DVector<f64>, rho: f64, a: f64) -> (Vec<usize>, Vec<usize>) {
    let f = (0..beta_k.len()).filter(|&i| beta_k[i].abs() - beta_star[i].abs() >= 1.0 / rho).collect();
    let thr = 4.0 * a / ((a + 1.0) * rho);
    let l = (0..beta_star.len()).filter(|&i| beta_star[i].abs() <= thr).collect();
    (f, l)
}
