mod common;

use caznrls::calibration::{psd_project, psd_project_matrix};
use caznrls::simulation::{corrupt, Corruption};
use caznrls::{calibrate, calibrate_with_policy, EpsPolicy, SurrogatePair};
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

#[test]
fn surrogate_is_unbiased_for_each_model() {
    let (n, p) = (40, 6);
    let mut r = rng(11);
    let x = gaussian_matrix(&mut r, n, p);
    let y = gaussian_vector(&mut r, n);
    let g = x.tr_mul(&x) / n as f64;
    let c = x.tr_mul(&y) / n as f64;
    for (corr, tau) in [(Corruption::Additive, 0.7), (Corruption::Multiplicative, 0.4), (Corruption::Missing, 0.3)] {
        let model = corr.error_model(tau, p);
        let mut sig = Vec::new();
        let mut xi = Vec::new();
        for _ in 0..1500 {
            let z = corrupt(&x, corr, tau, &mut r).unwrap();
            let s = model.surrogate(&z, &y).unwrap();
            sig.push(s.sigma_hat);
            xi.push(DMatrix::from_column_slice(p, 1, s.xi_hat.as_slice()));
        }
        let (ms, ses) = mean_and_se(&sig);
        let (mx, sex) = mean_and_se(&xi);
        for i in 0..p {
            for j in 0..p {
                assert!((ms[(i, j)] - g[(i, j)]).abs() <= 4.5 * ses[(i, j)] + 1e-12, "{corr} sigma ({i},{j})");
            }
            assert!((mx[i] - c[i]).abs() <= 4.5 * sex[i] + 1e-12, "{corr} xi {i}");
        }
    }
}

#[test]
fn projection_matches_nalgebra_eigen() {
    let mut r = rng(3);
    for p in [3, 12, 40] {
        let pair = random_surrogate(&mut r, p, p / 2 + 1);
        let eps = 0.05;
        let (w, _, _) = psd_project(&pair.sigma_hat, eps).unwrap();
        let reference = frobenius_psd(&pair.sigma_hat, eps);
        assert!((&w - &reference).amax() <= 1e-10 * reference.amax().max(1.0));
        let low_rank = psd_project_matrix(&pair.sigma_hat, eps).unwrap();
        assert!((&low_rank - &reference).amax() <= 1e-10 * reference.amax().max(1.0));
    }
}

#[test]
fn already_feasible_surrogate_is_left_alone() {
    let mut r = rng(4);
    let x = gaussian_matrix(&mut r, 60, 8);
    let sigma = x.tr_mul(&x) / 60.0 + DMatrix::identity(8, 8);
    let pair = SurrogatePair::new(sigma.clone(), gaussian_vector(&mut r, 8), 60).unwrap();
    let cal = calibrate(&pair, 0.5).unwrap();
    assert!((&cal.sigma_tilde - &sigma).amax() < 1e-12 * sigma.amax());
}

#[test]
fn default_policy_scales_with_top_eigenvalue() {
    let mut r = rng(5);
    let pair = random_surrogate(&mut r, 15, 6);
    let cal = calibrate_with_policy(&pair, EpsPolicy::default()).unwrap();
    let top = pair.sigma_hat.clone().symmetric_eigenvalues().max();
    assert!((cal.eps_hat - 1e-2 * top.max(1.0)).abs() < 1e-12 * top.max(1.0));
}

#[test]
fn calibrated_loss_differs_from_surrogate_only_by_projection() {
    // For a feasible surrogate the calibrated loss equals the surrogate quadratic up to a constant.
    let mut r = rng(6);
    let x = gaussian_matrix(&mut r, 50, 5);
    let sigma = x.tr_mul(&x) / 50.0;
    let xi = gaussian_vector(&mut r, 5);
    let pair = SurrogatePair::new(sigma.clone(), xi.clone(), 50).unwrap();
    let cal = calibrate(&pair, 1e-6).unwrap();
    let q = |b: &DVector<f64>| 0.5 * b.dot(&(&sigma * b)) - xi.dot(b);
    let b1 = gaussian_vector(&mut r, 5);
    let b2 = gaussian_vector(&mut r, 5);
    let d_cal = cal.loss(&b1) - cal.loss(&b2);
    let d_sur = q(&b1) - q(&b2);
    assert!((d_cal - d_sur).abs() < 1e-10 * (1.0 + d_sur.abs()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn calibrated_pair_reproduces_surrogate(seed in any::<u64>(), p in 2usize..30, eps in 1e-3f64..1.0) {
        let mut r = rng(seed);
        let pair = random_surrogate(&mut r, p, (p / 2).max(1));
        let cal = calibrate(&pair, eps).unwrap();
        let n = pair.n as f64;
        let recon = cal.z_tilde.tr_mul(&cal.z_tilde) / n;
        prop_assert!((&cal.sigma_tilde - recon).norm() <= 1e-10 * cal.sigma_tilde.norm().max(1.0));
        let xi = cal.z_tilde.tr_mul(&cal.y_tilde) / n;
        prop_assert!((&pair.xi_hat - xi).amax() <= 1e-10 * pair.xi_hat.amax().max(1.0));
        let min_eig = cal.sigma_tilde.clone().symmetric_eigenvalues().min();
        prop_assert!(min_eig >= eps - 1e-9);
        prop_assert!((&cal.sigma_tilde - cal.sigma_tilde.transpose()).amax() == 0.0);
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(seed in any::<u64>(), p in 2usize..20) {
        let mut r = rng(seed);
        let a = random_surrogate(&mut r, p, 2).sigma_hat;
        let b = random_surrogate(&mut r, p, 2).sigma_hat;
        let pa = psd_project_matrix(&a, 0.1).unwrap();
        let pb = psd_project_matrix(&b, 0.1).unwrap();
        let ppa = psd_project_matrix(&pa, 0.1).unwrap();
        prop_assert!((&ppa - &pa).amax() <= 1e-10 * pa.amax().max(1.0));
        prop_assert!((&pa - &pb).norm() <= (&a - &b).norm() * (1.0 + 1e-10) + 1e-12);
    }
}
