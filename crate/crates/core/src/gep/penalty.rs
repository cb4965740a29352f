//! Penalty calculus behind the multi-stage relaxation: the quadratic `phi`,
//! the conjugate of its restriction to `[0, 1]`, the induced SCAD penalty and
//! the closed-form weight update.

use nalgebra::DVector;

/// `phi(t) = (a-1)/(a+1) t^2 + 2/(a+1) t`.
pub fn phi(t: f64, a: f64) -> f64 {
    (a - 1.0) / (a + 1.0) * t * t + 2.0 / (a + 1.0) * t
}

/// Conjugate of `phi` restricted to `[0, 1]`.
pub fn psi_conjugate(omega: f64, a: f64) -> f64 {
    let lo = 2.0 / (a + 1.0);
    let hi = 2.0 * a / (a + 1.0);
    if omega <= lo {
        0.0
    } else if omega <= hi {
        let u = (a + 1.0) * omega - 2.0;
        u * u / (4.0 * (a * a - 1.0))
    } else {
        omega - 1.0
    }
}

/// `lambda [rho |t| - psi*(rho |t|)]` with `lambda = (a+1) gamma^2 / 2` and
/// `rho = 2 / ((a+1) gamma)`; this is the SCAD penalty with knots `gamma`, `a gamma`.
pub fn scad_penalty_via_conjugate(t: f64, gamma: f64, a: f64) -> f64 {
    let lambda = (a + 1.0) * gamma * gamma / 2.0;
    let rho = 2.0 / ((a + 1.0) * gamma);
    let u = rho * t.abs();
    lambda * (u - psi_conjugate(u, a))
}

/// Closed-form minimizer over `[0, 1]` of `phi(w) - rho w |beta_i|`, coordinatewise.
pub fn w_update(beta: &DVector<f64>, rho: f64, a: f64) -> DVector<f64> {
    beta.map(|b| {
        let raw = ((a + 1.0) * rho * b.abs() - 2.0) / (2.0 * (a - 1.0));
        raw.clamp(0.0, 1.0)
    })
}

/// Penalty parameter for stage `k >= 1` given the stage iterate.
///
/// `k = 1`: `max(1, 5 / (3 ||beta||_inf))`; `k = 2, 3`: `min(2 rho_prev, cap / ||beta||_inf)`;
/// later stages keep `rho_prev`. A zero iterate leaves `rho_prev` unchanged, and the
/// result never drops below `rho_prev` (only reachable when `||beta||_inf > cap / (2 rho_prev)`).
pub fn rho_schedule(k: usize, beta_k: &DVector<f64>, rho_prev: f64, cap: f64) -> f64 {
    let top = beta_k.amax();
    if top == 0.0 {
        return rho_prev;
    }
    match k {
        0 | 1 => 1f64.max(5.0 / (3.0 * top)),
        2 | 3 => (2.0 * rho_prev).min(cap / top).max(rho_prev),
        _ => rho_prev,
    }
}
