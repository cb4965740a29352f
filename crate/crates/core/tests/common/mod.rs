//! Reference implementations used as oracles. Each one is written
//! independently of the library code it checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use caznrls::SurrogatePair;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(r: &mut impl Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| r.sample(StandardNormal))
}

pub fn gaussian_vector(r: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.sample(StandardNormal))
}

/// Random symmetric indefinite surrogate built from `m < p` samples minus a noise floor.
pub fn random_surrogate(r: &mut impl Rng, p: usize, n: usize) -> SurrogatePair {
    let z = gaussian_matrix(r, n, p);
    let beta = gaussian_vector(r, p);
    let y = &z * &beta + gaussian_vector(r, n) * 0.5;
    let noise = 0.3 + r.random::<f64>();
    let sigma = z.tr_mul(&z) / n as f64 - DMatrix::identity(p, p) * noise;
    let xi = z.tr_mul(&y) / n as f64;
    SurrogatePair::new(sigma, xi, n).unwrap()
}

/// Weighted lasso objective `1/2 ||Z b - y||^2 + sum w_i |b_i|`.
pub fn lasso_objective(z: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, b: &DVector<f64>) -> f64 {
    0.5 * (z * b - y).norm_squared() + w.iter().zip(b.iter()).map(|(w, b)| w * b.abs()).sum::<f64>()
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Duality gap at `b` using the scaled residual as dual point (needs `w > 0`).
pub fn lasso_gap(z: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = z * b - y;
    let c = z.tr_mul(&r);
    let mut scale = 1.0_f64;
    for i in 0..c.len() {
        if c[i].abs() > 0.0 {
            scale = scale.min(w[i] / c[i].abs());
        }
    }
    let zeta = r * scale;
    let dual = -(0.5 * zeta.norm_squared() + y.dot(&zeta));
    lasso_objective(z, y, w, b) - dual
}

/// FISTA with adaptive restart until the duality gap is below `gap_tol`
/// (relative to `1 + |objective|`) and the iterate has settled.
pub fn fista_lasso(z: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, gap_tol: f64) -> DVector<f64> {
    let p = z.ncols();
    let lip = z.tr_mul(z).symmetric_eigenvalues().max();
    let step = 1.0 / lip;
    let mut x = DVector::zeros(p);
    let mut v = x.clone();
    let mut t = 1.0_f64;
    let mut f_prev = f64::INFINITY;
    for it in 0..500_000 {
        let g = z.tr_mul(&(z * &v - y));
        let mut x_new = &v - &g * step;
        for i in 0..p {
            x_new[i] = soft(x_new[i], w[i] * step);
        }
        let f = lasso_objective(z, y, w, &x_new);
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if f > f_prev {
            // restart momentum
            t = 1.0;
            v = x.clone();
            f_prev = f64::INFINITY;
            continue;
        }
        let dx = (&x_new - &x).amax();
        v = &x_new + (&x_new - &x) * ((t - 1.0) / t_new);
        x = x_new;
        t = t_new;
        f_prev = f;
        if it % 20 == 0 && lasso_gap(z, y, w, &x) <= gap_tol * (1.0 + f.abs()) && dx <= 1e-14 * (1.0 + x.amax()) {
            break;
        }
    }
    x
}

/// Euclidean projection onto the l1 ball by full sorting.
pub fn l1_project_sort(v: &DVector<f64>, z: f64) -> DVector<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= z {
        return v.clone();
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - z) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// Fan-Li SCAD penalty with knots `gamma` and `a gamma`.
pub fn scad_textbook(t: f64, gamma: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= gamma {
        gamma * t
    } else if t <= a * gamma {
        (2.0 * a * gamma * t - t * t - gamma * gamma) / (2.0 * (a - 1.0))
    } else {
        (a + 1.0) * gamma * gamma / 2.0
    }
}

fn phi_ref(t: f64, a: f64) -> f64 {
    ((a - 1.0) * t * t + 2.0 * t) / (a + 1.0)
}

/// `max_{t in [0,1]} t w - phi(t)` by a grid scan refined with golden-section search.
pub fn psi_star_grid(w: f64, a: f64) -> f64 {
    let f = |t: f64| t * w - phi_ref(t, a);
    let m = 2000;
    let mut best = 0;
    for k in 0..=m {
        if f(k as f64 / m as f64) > f(best as f64 / m as f64) {
            best = k;
        }
    }
    let mut lo = (best as f64 - 1.0).max(0.0) / m as f64;
    let mut hi = (best as f64 + 1.0).min(m as f64) / m as f64;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = hi - g * (hi - lo);
        let d = lo + g * (hi - lo);
        if f(c) >= f(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let t = 0.5 * (lo + hi);
    f(t).max(f(0.0)).max(f(1.0))
}

/// `argmin_{w in [0,1]} phi(w) - rho w |b|` on a grid of spacing `1/m`.
pub fn w_grid(b: f64, rho: f64, a: f64, m: usize) -> f64 {
    let mut best_w = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..=m {
        let w = k as f64 / m as f64;
        let v = phi_ref(w, a) - rho * w * b.abs();
        if v < best {
            best = v;
            best_w = w;
        }
    }
    best_w
}

/// Frobenius projection onto `{W : W >= eps I}` via nalgebra's own eigensolver.
pub fn frobenius_psd(m: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let e = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|t| t.max(eps)));
    let w = &e.eigenvectors * d * e.eigenvectors.transpose();
    (&w + w.transpose()) * 0.5
}

/// Smallest Rayleigh quotient over a dense normalized grid of the REC cone
/// (`p` small). Grid points are vectors with entries in `{-1, -1+h, ..., 1}`.
pub fn rec_grid(sigma: &DMatrix<f64>, support: &[usize], s: usize, levels: usize) -> f64 {
    let p = sigma.nrows();
    let max_size = (1.5 * s as f64).floor() as usize;
    let vals: Vec<f64> = (0..levels).map(|k| -1.0 + 2.0 * k as f64 / (levels - 1) as f64).collect();
    let total = levels.pow(p as u32);
    let mut best = f64::INFINITY;
    let mut b = DVector::zeros(p);
    for code in 0..total {
        let mut c = code;
        for i in 0..p {
            b[i] = vals[c % levels];
            c /= levels;
        }
        let nrm = b.norm_squared();
        if nrm == 0.0 {
            continue;
        }
        if !in_cone(&b, support, max_size) {
            continue;
        }
        best = best.min(b.dot(&(sigma * &b)) / nrm);
    }
    best
}

/// Membership in the union over supersets `S` of `support`, `|S| <= max_size`,
/// of `{||b_{S^c}||_1 <= 3 ||b_S||_1}`; the best `S` adds the largest off-support entries.
pub fn in_cone(b: &DVector<f64>, support: &[usize], max_size: usize) -> bool {
    let p = b.len();
    let mut on = vec![false; p];
    for &i in support {
        on[i] = true;
    }
    let mut off: Vec<f64> = (0..p).filter(|&i| !on[i]).map(|i| b[i].abs()).collect();
    off.sort_by(|a, b| b.total_cmp(a));
    let extra = max_size.saturating_sub(support.len()).min(off.len());
    let in_s: f64 = support.iter().map(|&i| b[i].abs()).sum::<f64>() + off[..extra].iter().sum::<f64>();
    let out_s: f64 = off[extra..].iter().sum();
    out_s <= 3.0 * in_s
}

/// Mean and standard error of each entry over a list of equally shaped matrices.
pub fn mean_and_se(samples: &[DMatrix<f64>]) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = samples.len() as f64;
    let (r, c) = samples[0].shape();
    let mut mean = DMatrix::zeros(r, c);
    for s in samples {
        mean += s;
    }
    mean /= k;
    let mut var = DMatrix::zeros(r, c);
    for s in samples {
        let d = s - &mean;
        var += d.component_mul(&d);
    }
    var /= k - 1.0;
    (mean, var.map(|v| (v / k).sqrt()))
}

/// Prox of `t * max_ij |x_ij|` by clipping at the level `theta` with
/// `sum (|x| - theta)_+ = t`, located by bisection and then solved exactly on
/// the active set. Independent of any l1-ball projection.
pub fn max_norm_prox(x: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= t {
        return DMatrix::zeros(x.nrows(), x.ncols());
    }
    let excess = |theta: f64| x.iter().map(|v| (v.abs() - theta).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, x.amax());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let active: Vec<f64> = x.iter().map(|v| v.abs()).filter(|&a| a > lo).collect();
    let theta = (active.iter().sum::<f64>() - t) / active.len() as f64;
    x.map(|v| v.signum() * v.abs().min(theta))
}
