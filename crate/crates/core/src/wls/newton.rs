use nalgebra::{DMatrix, DVector};

use super::{box_excess, phi_from_h, phi_value_from_h, NewtonParams, WeightedLassoProblem};

/// Result of minimizing `Phi` for a fixed multiplier and penalty.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub zeta: DVector<f64>,
    pub grad: DVector<f64>,
    pub grad_norm: f64,
    pub value: f64,
    pub iters: usize,
    pub cg_iters: usize,
    pub converged: bool,
    /// `Phi` at the start point and after each accepted step.
    pub values: Vec<f64>,
}

/// Semismooth Newton-CG on `grad Phi(zeta) = 0`.
///
/// Each step solves `V d = -grad` with `V = I + mu Z (I - W) Z^T` to a residual of
/// `min(theta, ||grad||^(1 + varsigma))`, then backtracks until the Armijo
/// condition holds. Stops once `||grad|| <= stop_norm`.
pub fn semismooth_newton(
    prob: &WeightedLassoProblem<'_>,
    multiplier: &DVector<f64>,
    mu: f64,
    zeta_start: &DVector<f64>,
    params: &NewtonParams,
    stop_norm: f64,
) -> NewtonOutcome {
    let z = prob.z;
    let mut zeta = zeta_start.clone();
    let mut h = z.tr_mul(&zeta) + multiplier / mu;
    let (mut value, mut grad) = phi_from_h(&zeta, &h, mu, prob);
    let mut values = vec![value];
    let mut cg_iters = 0;
    let mut iters = 0;
    let mut converged = false;

    while iters < params.max_newton_iters {
        let gnorm = grad.norm();
        if gnorm <= stop_norm {
            converged = true;
            break;
        }
        iters += 1;

        // Coordinates where the Jacobian of the projection is 0.
        let outside: Vec<usize> = (0..h.len()).filter(|&i| h[i].abs() >= prob.omega[i]).collect();
        let rhs = -&grad;
        let cg_tol = params.theta.min(gnorm.powf(1.0 + params.varsigma));
        let (mut d, used) = newton_direction(z, &outside, mu, &rhs, cg_tol, params);
        cg_iters += used;

        let mut slope = grad.dot(&d);
        if !(slope < 0.0) || !slope.is_finite() {
            d = rhs;
            slope = -gnorm * gnorm;
        }
        let zd = z.tr_mul(&d);

        let mut step = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        for _ in 0..60 {
            let trial = &zeta + &d * step;
            let h_trial = &h + &zd * step;
            let v = phi_value_from_h(&trial, &h_trial, mu, prob);
            if v <= value + params.rho_ls * step * slope {
                accepted = Some((trial, h_trial, v));
                break;
            }
            // Armijo cannot resolve decreases below rounding; keep a full step
            // that does not raise Phi beyond that level as a fallback.
            if fallback.is_none() && v <= value + 16.0 * f64::EPSILON * (1.0 + value.abs()) {
                fallback = Some((trial, h_trial, v));
            }
            step *= params.delta;
        }
        let Some((trial, h_trial, v)) = accepted.or(fallback) else {
            break;
        };
        zeta = trial;
        h = h_trial;
        value = v;
        grad = gradient_from_h(&zeta, &h, mu, prob);
        values.push(value);
    }

    let grad_norm = grad.norm();
    if !converged && grad_norm <= stop_norm {
        converged = true;
    }
    NewtonOutcome { zeta, grad, grad_norm, value, iters, cg_iters, converged, values }
}

fn gradient_from_h(zeta: &DVector<f64>, h: &DVector<f64>, mu: f64, prob: &WeightedLassoProblem<'_>) -> DVector<f64> {
    let excess = box_excess(h, &prob.omega);
    let mut grad = prob.y + zeta;
    for (i, &e) in excess.iter().enumerate() {
        if e != 0.0 {
            grad.axpy(mu * e, &prob.z.column(i), 1.0);
        }
    }
    grad
}

/// Solve `(I + mu Z_J Z_J^T) d = rhs`, returning `d` and the CG iterations spent.
fn newton_direction(
    z: &DMatrix<f64>,
    outside: &[usize],
    mu: f64,
    rhs: &DVector<f64>,
    cg_tol: f64,
    params: &NewtonParams,
) -> (DVector<f64>, usize) {
    if outside.is_empty() {
        return (rhs.clone(), 0);
    }
    if outside.len() <= params.direct_max {
        if let Some(d) = woodbury_solve(z, outside, mu, rhs) {
            return (d, 0);
        }
    }
    conjugate_gradient(z, outside, mu, rhs, cg_tol, params.max_cg_iters)
}

/// `V^{-1} rhs = rhs - A (I/mu + A^T A)^{-1} A^T rhs` with `A = Z_J`.
fn woodbury_solve(z: &DMatrix<f64>, outside: &[usize], mu: f64, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let a = z.select_columns(outside);
    let mut small = a.tr_mul(&a);
    for i in 0..outside.len() {
        small[(i, i)] += 1.0 / mu;
    }
    let chol = small.cholesky()?;
    let u = chol.solve(&a.tr_mul(rhs));
    Some(rhs - a * u)
}

fn apply_v(z: &DMatrix<f64>, outside: &[usize], mu: f64, v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    for &i in outside {
        let col = z.column(i);
        let c = col.dot(v);
        out.axpy(mu * c, &col, 1.0);
    }
    out
}

fn conjugate_gradient(
    z: &DMatrix<f64>,
    outside: &[usize],
    mu: f64,
    rhs: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> (DVector<f64>, usize) {
    let mut x = DVector::zeros(rhs.len());
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut used = 0;
    while used < max_iters && rr.sqrt() > tol {
        used += 1;
        let vp = apply_v(z, outside, mu, &p);
        let alpha = rr / p.dot(&vp);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &vp, 1.0);
        let rr_new = r.norm_squared();
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    (x, used)
}
