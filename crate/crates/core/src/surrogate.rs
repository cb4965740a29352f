//! Unbiased surrogates of the clean Gram pair `(X^T X / n, X^T y / n)`
//! built from a corrupted design `Z`.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, param_err, Result};
use crate::linalg::{gram, symmetrize_in_place};

/// Surrogate `(sigma_hat, xi_hat)` for `(X^T X / n, X^T y / n)`.
///
/// `sigma_hat` is exactly symmetric but may be indefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogatePair {
    pub sigma_hat: DMatrix<f64>,
    pub xi_hat: DVector<f64>,
    pub n: usize,
}

impl SurrogatePair {
    pub fn new(sigma_hat: DMatrix<f64>, xi_hat: DVector<f64>, n: usize) -> Result<Self> {
        let p = xi_hat.len();
        if sigma_hat.nrows() != p || sigma_hat.ncols() != p {
            return Err(dim_err(format!(
                "sigma_hat is {}x{} but xi_hat has length {p}",
                sigma_hat.nrows(),
                sigma_hat.ncols()
            )));
        }
        if n == 0 {
            return Err(param_err("sample count must be positive"));
        }
        let mut sigma_hat = sigma_hat;
        symmetrize_in_place(&mut sigma_hat);
        Ok(Self { sigma_hat, xi_hat, n })
    }

    pub fn p(&self) -> usize {
        self.xi_hat.len()
    }
}

/// Measurement-error model with its (assumed known) corruption moments.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorModel {
    /// `Z = X + A`, rows of `A` with covariance `sigma_a`.
    Additive { sigma_a: DMatrix<f64> },
    /// `Z = X ∘ M`, rows of `M` with mean `mu_m` and covariance `sigma_m`.
    Multiplicative { mu_m: DVector<f64>, sigma_m: DMatrix<f64> },
    /// Each entry of `X` is independently replaced by 0 with probability `tau`.
    Missing { tau: f64 },
}

impl ErrorModel {
    /// Check the model invariants for a design with `p` columns.
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            ErrorModel::Additive { sigma_a } => {
                if sigma_a.nrows() != p || sigma_a.ncols() != p {
                    return Err(dim_err(format!("sigma_A must be {p}x{p}")));
                }
                let asym = (sigma_a - sigma_a.transpose()).amax();
                if asym > 1e-12 * sigma_a.amax().max(1.0) {
                    return Err(param_err("sigma_A must be symmetric"));
                }
                let min_eig = sigma_a.clone().symmetric_eigenvalues().min();
                if min_eig < -1e-10 * sigma_a.amax().max(1.0) {
                    return Err(param_err("sigma_A must be positive semidefinite"));
                }
                Ok(())
            }
            ErrorModel::Multiplicative { mu_m, sigma_m } => {
                if mu_m.len() != p || sigma_m.nrows() != p || sigma_m.ncols() != p {
                    return Err(dim_err(format!("mu_M must have length {p} and sigma_M be {p}x{p}")));
                }
                if mu_m.iter().any(|&m| !(m > 0.0)) {
                    return Err(param_err("mu_M entries must be strictly positive"));
                }
                let second = second_moment(mu_m, sigma_m);
                if second.iter().any(|&v| !(v > 0.0)) {
                    return Err(param_err("sigma_M + mu_M mu_M^T must be entrywise positive"));
                }
                Ok(())
            }
            ErrorModel::Missing { tau } => {
                if !(0.0..1.0).contains(tau) {
                    return Err(param_err(format!("missing rate tau = {tau} must lie in [0, 1)")));
                }
                Ok(())
            }
        }
    }

    /// Surrogate pair for corrupted data generated under this model.
    pub fn surrogate(&self, z: &DMatrix<f64>, y: &DVector<f64>) -> Result<SurrogatePair> {
        match self {
            ErrorModel::Additive { sigma_a } => additive_surrogate(z, y, sigma_a),
            ErrorModel::Multiplicative { mu_m, sigma_m } => multiplicative_surrogate(z, y, mu_m, sigma_m),
            ErrorModel::Missing { tau } => missing_surrogate(z, y, *tau),
        }
    }
}

fn second_moment(mu_m: &DVector<f64>, sigma_m: &DMatrix<f64>) -> DMatrix<f64> {
    sigma_m + mu_m * mu_m.transpose()
}

fn check_data(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<(usize, usize)> {
    let (n, p) = z.shape();
    if n == 0 || p == 0 {
        return Err(dim_err(format!("design must be non-empty, got {n}x{p}")));
    }
    if y.len() != n {
        return Err(dim_err(format!("response has length {} but design has {n} rows", y.len())));
    }
    Ok((n, p))
}

fn raw_moments(z: &DMatrix<f64>, y: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = z.nrows() as f64;
    let g = gram(z) / n;
    let c = z.tr_mul(y) / n;
    (g, c)
}

/// `sigma_hat = Z^T Z / n - sigma_A`, `xi_hat = Z^T y / n`.
pub fn additive_surrogate(z: &DMatrix<f64>, y: &DVector<f64>, sigma_a: &DMatrix<f64>) -> Result<SurrogatePair> {
    let (n, p) = check_data(z, y)?;
    if sigma_a.shape() != (p, p) {
        return Err(dim_err(format!(
            "sigma_A is {}x{} but the design has {p} columns",
            sigma_a.nrows(),
            sigma_a.ncols()
        )));
    }
    let (g, c) = raw_moments(z, y);
    SurrogatePair::new(g - sigma_a, c, n)
}

/// Elementwise-divided surrogate for `Z = X ∘ M`:
/// `sigma_hat = (Z^T Z / n) ⊘ (sigma_M + mu_M mu_M^T)`, `xi_hat = (Z^T y / n) ⊘ mu_M`.
pub fn multiplicative_surrogate(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    mu_m: &DVector<f64>,
    sigma_m: &DMatrix<f64>,
) -> Result<SurrogatePair> {
    let (n, p) = check_data(z, y)?;
    if mu_m.len() != p || sigma_m.shape() != (p, p) {
        return Err(dim_err(format!("mu_M must have length {p} and sigma_M be {p}x{p}")));
    }
    if mu_m.iter().any(|&m| m == 0.0) {
        return Err(param_err("mu_M has a zero entry"));
    }
    let divisor = second_moment(mu_m, sigma_m);
    if divisor.iter().any(|&v| v == 0.0) {
        return Err(param_err("sigma_M + mu_M mu_M^T has a zero entry"));
    }
    let (g, c) = raw_moments(z, y);
    SurrogatePair::new(g.component_div(&divisor), c.component_div(mu_m), n)
}

/// Missing-completely-at-random surrogate with known rate `tau`.
///
/// Divides by the Bernoulli(1 - tau) mask moments: `1 - tau` on the diagonal,
/// `(1 - tau)^2` off it.
pub fn missing_surrogate(z: &DMatrix<f64>, y: &DVector<f64>, tau: f64) -> Result<SurrogatePair> {
    let (n, p) = check_data(z, y)?;
    if !(0.0..1.0).contains(&tau) {
        return Err(param_err(format!("missing rate tau = {tau} must lie in [0, 1)")));
    }
    let keep = 1.0 - tau;
    let (mut g, c) = raw_moments(z, y);
    let off = keep * keep;
    for j in 0..p {
        for i in 0..p {
            g[(i, j)] /= if i == j { keep } else { off };
        }
    }
    SurrogatePair::new(g, c / keep, n)
}
