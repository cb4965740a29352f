//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test --release --test acceptance -- 1 5 10`.

mod common;

use std::time::{Duration, Instant};

use caznrls::baselines::{l1_ball_project, nearest_pd_maxnorm, AdmmParams, NearestPdAdmm};
use caznrls::experiment::{
    aggregate, fit_method, presets, run_experiment, AggregateRow, CvConfig, ExperimentConfig, Method, ScenarioEntry,
    SolverSettings,
};
use caznrls::gep::{psi_conjugate, scad_penalty_via_conjugate, w_update};
use caznrls::simulation::{corrupt, derive_seed, rng_from_seed, Corruption, Dataset, ExampleId, ScenarioSpec};
use caznrls::wls::{solve, AlmParams, WeightedLassoProblem};
use caznrls::{calibrate_with_policy, EpsPolicy};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn c1_calibration_identities() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst_sigma = 0.0_f64;
    let mut worst_xi = 0.0_f64;
    let mut worst_eig = f64::INFINITY;
    for k in 0..100 {
        let p = [10, 50, 200][k % 3];
        let pair = random_surrogate(&mut r, p, (p / 2).max(2));
        let cal = calibrate_with_policy(&pair, EpsPolicy::default()).unwrap();
        let n = pair.n as f64;
        let ds = (&cal.sigma_tilde - cal.z_tilde.tr_mul(&cal.z_tilde) / n).norm() / cal.sigma_tilde.norm().max(1.0);
        let dx = (&pair.xi_hat - cal.z_tilde.tr_mul(&cal.y_tilde) / n).amax() / pair.xi_hat.amax().max(1.0);
        let lmin = cal.sigma_tilde.clone().symmetric_eigenvalues().min() - cal.eps_hat;
        worst_sigma = worst_sigma.max(ds);
        worst_xi = worst_xi.max(dx);
        worst_eig = worst_eig.min(lmin);
    }
    let t = secs(start.elapsed());
    outcome(
        worst_sigma <= 1e-10 && worst_xi <= 1e-10 && worst_eig >= -1e-9 && t < 5.0,
        format!("max rel sigma err {worst_sigma:.1e}, max rel xi err {worst_xi:.1e}, min(lambda_min - eps) {worst_eig:.1e}, {t:.2} s"),
    )
}

fn c2_unbiasedness() -> Outcome {
    let start = Instant::now();
    let (n, p, draws) = (50, 20, 2000);
    let mut r = rng(202);
    let x = gaussian_matrix(&mut r, n, p);
    let beta = gaussian_vector(&mut r, p);
    let y = &x * &beta + gaussian_vector(&mut r, n) * 0.5;
    let g = x.tr_mul(&x) / n as f64;
    let c = x.tr_mul(&y) / n as f64;
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (corr, tau) in [(Corruption::Additive, 1.0), (Corruption::Multiplicative, 0.8), (Corruption::Missing, 0.5)] {
        let model = corr.error_model(tau, p);
        let mut sig = Vec::with_capacity(draws);
        let mut xi = Vec::with_capacity(draws);
        for _ in 0..draws {
            let z = corrupt(&x, corr, tau, &mut r).unwrap();
            let s = model.surrogate(&z, &y).unwrap();
            sig.push(s.sigma_hat);
            xi.push(DMatrix::from_column_slice(p, 1, s.xi_hat.as_slice()));
        }
        let (ms, ses) = mean_and_se(&sig);
        let (mx, sex) = mean_and_se(&xi);
        let mut z_max = 0.0_f64;
        for i in 0..p {
            for j in 0..p {
                z_max = z_max.max((ms[(i, j)] - g[(i, j)]).abs() / ses[(i, j)]);
            }
            z_max = z_max.max((mx[i] - c[i]).abs() / sex[i]);
        }
        worst = worst.max(z_max);
        parts.push(format!("{corr} max |bias|/SE {z_max:.2}"));
    }
    let t = secs(start.elapsed());
    outcome(worst <= 4.0 && t < 30.0, format!("{}, {t:.1} s", parts.join(", ")))
}

fn c3_inner_solver() -> Outcome {
    let start = Instant::now();
    let mut r = rng(303);
    let mut worst_diff = 0.0_f64;
    let mut worst_kkt = 0.0_f64;
    let mut all_converged = true;
    for k in 0..50 {
        let p = 5 + (k * 7) % 36;
        let (z, y) = if k % 2 == 0 {
            let rows = p + 10 + (k % 5) * 5;
            let z = gaussian_matrix(&mut r, rows, p);
            let y = gaussian_vector(&mut r, rows) * 2.0;
            (z, y)
        } else {
            let pair = random_surrogate(&mut r, p, (p / 2).max(2));
            let cal = calibrate_with_policy(&pair, EpsPolicy::default()).unwrap();
            (cal.z_tilde, cal.y_tilde)
        };
        let top = z.tr_mul(&y).amax();
        let level = 0.02 + 0.5 * r.random::<f64>();
        let w = DVector::from_fn(p, |_, _| top * level * (0.3 + 0.7 * r.random::<f64>()));
        let prob = WeightedLassoProblem::new(&z, &y, w.clone()).unwrap();
        let sol = solve(&prob, &AlmParams::default(), None).unwrap();
        all_converged &= sol.converged;
        let reference = fista_lasso(&z, &y, &w, 1e-14);
        assert!(lasso_gap(&z, &y, &w, &reference) <= 1e-10 * (1.0 + lasso_objective(&z, &y, &w, &reference)));
        worst_diff = worst_diff.max((&sol.beta - &reference).amax());
        worst_kkt = worst_kkt.max(prob.kkt_violation(&sol.beta));
    }
    let t = secs(start.elapsed());
    outcome(
        all_converged && worst_diff <= 1e-6 && worst_kkt <= 1e-8 && t < 60.0,
        format!("max |beta_alm - beta_ref|_inf {worst_diff:.1e}, max KKT {worst_kkt:.1e}, {t:.1} s"),
    )
}

fn c4_penalty_calculus() -> Outcome {
    let mut worst_conj = 0.0_f64;
    for a in [3.7, 6.0] {
        for k in 0..1000 {
            let omega = -1.0 + 4.0 * k as f64 / 999.0;
            worst_conj = worst_conj.max((psi_conjugate(omega, a) - psi_star_grid(omega, a)).abs());
        }
    }
    let mut worst_scad = 0.0_f64;
    for a in [6.0, 3.7] {
        for gamma in [0.5, 1.0, 2.0] {
            let top = (a + 2.0) * gamma;
            for k in 0..=20_000 {
                let t = -top + 2.0 * top * k as f64 / 20_000.0;
                worst_scad =
                    worst_scad.max((scad_penalty_via_conjugate(t, gamma, a) - scad_textbook(t, gamma, a)).abs());
            }
        }
    }
    let mut worst_w = 0.0_f64;
    let mut r = rng(404);
    for _ in 0..200 {
        let b: f64 = 3.0 * r.sample::<f64, _>(StandardNormal);
        let rho = 0.2 + 5.0 * r.random::<f64>();
        let a = if r.random::<bool>() { 6.0 } else { 3.7 };
        let w = w_update(&DVector::from_element(1, b), rho, a)[0];
        worst_w = worst_w.max((w - w_grid(b, rho, a, 100_000)).abs());
    }
    outcome(
        worst_conj <= 1e-8 && worst_scad <= 1e-10 && worst_w <= 1e-4,
        format!("conjugate {worst_conj:.1e}, SCAD {worst_scad:.1e}, weight update {worst_w:.1e}"),
    )
}

fn c5_l1_projection() -> Outcome {
    let mut r = rng(505);
    let mut worst = 0.0_f64;
    let mut boundary = 0;
    for k in 0..1000 {
        let len = 1 + r.random_range(0..200);
        let scale = 10f64.powi(r.random_range(-3..4));
        let mut v = gaussian_vector(&mut r, len) * scale;
        if k % 7 == 0 {
            // ties and exact zeros
            for i in 0..len {
                if i % 3 == 0 {
                    v[i] = 0.0;
                } else if i % 3 == 1 {
                    v[i] = scale;
                }
            }
        }
        let l1: f64 = v.iter().map(|x| x.abs()).sum();
        let radius = match k % 5 {
            0 => {
                boundary += 1;
                l1
            }
            1 => 2.0 * l1 + 1.0,
            _ => (l1 * r.random::<f64>()).max(1e-12),
        };
        let a = l1_ball_project(&v, radius);
        let b = l1_project_sort(&v, radius);
        worst = worst.max((&a - &b).amax() / v.amax().max(1.0));
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.1e} over 1000 pairs ({boundary} with ||v||_1 = radius)"))
}

fn c6_admm() -> Outcome {
    let mut r = rng(606);
    let params = AdmmParams::default();
    let mut worst_stop = 0.0_f64;
    let mut worst_moreau = 0.0_f64;
    let mut max_iters = 0;
    let mut all_converged = true;
    for _ in 0..20 {
        let pair = random_surrogate(&mut r, 30, 12);
        let min_eig = pair.sigma_hat.clone().symmetric_eigenvalues().min();
        assert!(min_eig < 0.0, "input must be indefinite");
        let eps = EpsPolicy::default().resolve(pair.sigma_hat.clone().symmetric_eigenvalues().max());
        let mut admm = NearestPdAdmm::new(&pair.sigma_hat, eps, params).unwrap();
        let diag = admm
            .run_observed(|state, _, upd| {
                if state.iterations() % 5 == 1 {
                    let prox = max_norm_prox(&upd.g, 1.0 / state.mu);
                    let err = (&prox + &upd.projection - &upd.g).amax() / upd.g.amax().max(1.0);
                    worst_moreau = worst_moreau.max((&prox - &state.b).amax() / upd.g.amax().max(1.0));
                    worst_moreau = worst_moreau.max(err);
                }
            })
            .unwrap();
        let res = diag.residuals;
        let stop = res.pinf.max(res.dinf).max(params.gap_weight * res.gap.abs());
        worst_stop = worst_stop.max(stop);
        max_iters = max_iters.max(diag.iterations);
        all_converged &= diag.converged;
    }
    outcome(
        all_converged && worst_stop <= 1e-4 && max_iters <= 5000 && worst_moreau <= 1e-12,
        format!(
            "max stopping measure {worst_stop:.1e}, max iterations {max_iters}, max Moreau error {worst_moreau:.1e}"
        ),
    )
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn rows_for<'a>(rows: &'a [AggregateRow], scenario: usize, method: Method) -> &'a AggregateRow {
    rows.iter().find(|a| a.scenario_index == scenario && a.method == method).expect("aggregate row")
}

/// Reference values `(caz rmse, caz nc, caz nic, coco rmse, ncl rmse)` per error model.
const REFERENCE: [(&str, [f64; 5]); 3] = [
    ("additive", [0.410, 2.81, 1.48, 0.492, 0.535]),
    ("multiplicative", [0.370, 2.76, 1.30, 0.524, 0.600]),
    ("missing", [0.447, 2.69, 2.41, 0.521, 0.528]),
];

fn c7_table1() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { out_dir: dir.path().to_path_buf(), jobs: jobs(), ..presets::table1(100) };
    let start = Instant::now();
    let out = run_experiment(&cfg).unwrap();
    let minutes = secs(start.elapsed()) / 60.0;
    let mut pass = true;
    let mut lines = Vec::new();
    for (k, (name, reference)) in REFERENCE.iter().enumerate() {
        let caz = rows_for(&out.aggregates, k, Method::Caznrls);
        let coco = rows_for(&out.aggregates, k, Method::Cocolasso);
        let ncl = rows_for(&out.aggregates, k, Method::Ncl);
        let checks = [
            ("CaZnRLS RMSE", caz.mean_rmse, reference[0], 0.10),
            ("CaZnRLS NC", caz.mean_nc, reference[1], 0.35),
            ("CaZnRLS NIC", caz.mean_nic, reference[2], 1.0),
            ("CoCoLasso RMSE", coco.mean_rmse, reference[3], 0.10),
            ("NCL RMSE", ncl.mean_rmse, reference[4], 0.12),
        ];
        let mut bad = Vec::new();
        for (label, got, want, tol) in checks {
            if !((got - want).abs() <= tol) {
                bad.push(format!("{label} {got:.3} outside {want} +- {tol}"));
            }
        }
        let order_rmse = caz.mean_rmse < coco.mean_rmse && coco.mean_rmse < ncl.mean_rmse;
        let order_nic = caz.mean_nic < coco.mean_nic;
        if !order_rmse {
            bad.push("RMSE ordering".into());
        }
        if !order_nic {
            bad.push("NIC ordering".into());
        }
        let failed = caz.failed + coco.failed + ncl.failed;
        if failed > 0 {
            bad.push(format!("{failed} failed fits"));
        }
        pass &= bad.is_empty();
        lines.push(format!(
            "      {name:<14} CaZnRLS rmse {:.3} nc {:.2} nic {:.2} | CoCoLasso rmse {:.3} nc {:.2} nic {:.2} | NCL rmse {:.3} nc {:.2} nic {:.2}{}",
            caz.mean_rmse,
            caz.mean_nc,
            caz.mean_nic,
            coco.mean_rmse,
            coco.mean_nc,
            coco.mean_nic,
            ncl.mean_rmse,
            ncl.mean_nc,
            ncl.mean_nic,
            if bad.is_empty() { String::new() } else { format!("  [{}]", bad.join("; ")) }
        ));
    }
    let runtime_ok = minutes < 30.0;
    pass &= runtime_ok;

    // One alpha = 5.0, 20-replication spot check per figure family at reduced dimension.
    let mut spot = Vec::new();
    for example in [
        ExampleId::Ex1,
        ExampleId::Ex2,
        ExampleId::Ex3,
        ExampleId::Ex4,
        ExampleId::Ex5,
        ExampleId::Ex6,
        ExampleId::Ex7,
        ExampleId::Ex8,
    ] {
        let p = if example == ExampleId::Ex8 { 250 } else { 200 };
        let mut fam = presets::figure_family(example, p, &[5.0], 20);
        fam.scenarios.truncate(1);
        fam.jobs = jobs();
        fam.out_dir = dir.path().to_path_buf();
        let rows = aggregate(&caznrls::experiment::run_records(&fam).unwrap());
        let caz = rows_for(&rows, 0, Method::Caznrls);
        let coco = rows_for(&rows, 0, Method::Cocolasso);
        let ncl = rows.iter().find(|a| a.method == Method::Ncl);
        let mut broken = Vec::new();
        if !(caz.mean_rmse < coco.mean_rmse) {
            broken.push("RMSE CaZnRLS >= CoCoLasso");
        }
        if ncl.is_some_and(|n| !(coco.mean_rmse < n.mean_rmse)) {
            broken.push("RMSE CoCoLasso >= NCL");
        }
        if !(caz.mean_nic < coco.mean_nic) {
            broken.push("NIC CaZnRLS >= CoCoLasso");
        }
        pass &= broken.is_empty();
        spot.push(format!(
            "      spot {example} p={p}: rmse {:.3}/{:.3}/{} nic {:.2}/{:.2}/{} {}",
            caz.mean_rmse,
            coco.mean_rmse,
            ncl.map_or("-".into(), |n| format!("{:.3}", n.mean_rmse)),
            caz.mean_nic,
            coco.mean_nic,
            ncl.map_or("-".into(), |n| format!("{:.2}", n.mean_nic)),
            if broken.is_empty() { "ok".to_string() } else { format!("[{}]", broken.join("; ")) }
        ));
    }
    let mut detail = format!(
        "three-model comparison, 100 replications, in {minutes:.1} min on {} thread(s){}\n{}\n{}",
        jobs(),
        if runtime_ok { "" } else { " [exceeds 30 min]" },
        lines.join("\n"),
        spot.join("\n")
    );
    detail.push_str("\n      (spot columns: CaZnRLS/CoCoLasso/NCL)");
    outcome(pass, detail)
}

fn c8_sign_consistency() -> Outcome {
    let (p, s) = (200, 3);
    let n = (10.0 * s as f64 * (p as f64).ln()).floor() as usize;
    let solver = SolverSettings::new();
    let cv = CvConfig::default();
    let mut hits = 0;
    for run in 0..100u64 {
        let seed = derive_seed(808, run);
        let mut r = rng_from_seed(seed);
        let mut idx: Vec<usize> = (0..p).collect();
        idx.shuffle(&mut r);
        let mut support: Vec<usize> = idx[..s].to_vec();
        support.sort_unstable();
        let mut beta_star = DVector::zeros(p);
        for &i in &support {
            let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
            beta_star[i] = sign * (2.0 + r.random::<f64>());
        }
        let x = gaussian_matrix(&mut r, n, p);
        let y = &x * &beta_star + gaussian_vector(&mut r, n) * 0.5;
        let ds = Dataset { z: x.clone(), x, y, beta_star, support, corruption: Corruption::None, tau: 0.0 };
        let f = fit_method(&ds, Method::Caznrls, &cv, &solver, derive_seed(seed, 1)).unwrap();
        let same = (0..p).all(|i| {
            let b = if f.beta[i].abs() > solver.zero_threshold { f.beta[i].signum() } else { 0.0 };
            b == if ds.beta_star[i] == 0.0 { 0.0 } else { ds.beta_star[i].signum() }
        });
        hits += same as usize;
    }
    outcome(hits >= 95, format!("exact sign recovery in {hits}/100 runs (p = {p}, n = {n}, CV-tuned lambda)"))
}

fn c9_calibration_speed() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [500, 1000] {
        let mut spec = ScenarioSpec::new(ExampleId::Ex2, p, 5.0, 0.5, 909);
        spec.corruption = Some(Corruption::Additive);
        let ds = caznrls::simulation::generate(&spec).unwrap();
        let pair = ds.error_model().surrogate(&ds.z, &ds.y).unwrap();
        let t = Instant::now();
        let cal = calibrate_with_policy(&pair, EpsPolicy::default()).unwrap();
        let t_cal = secs(t.elapsed());
        let t = Instant::now();
        let (_, diag) = nearest_pd_maxnorm(&pair.sigma_hat, cal.eps_hat, &AdmmParams::default()).unwrap();
        let t_admm = secs(t.elapsed());
        let ratio = t_cal / t_admm;
        pass &= diag.converged && ratio < 0.05;
        parts.push(format!(
            "p = {p}: eigen {:.3} s, ADMM {:.2} s ({} iterations), ratio {:.2}%",
            t_cal,
            t_admm,
            diag.iterations,
            100.0 * ratio
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c10_parallel_determinism() -> Outcome {
    let mut scenarios = Vec::new();
    for (ex, tau) in [(ExampleId::Ex2, 0.5), (ExampleId::Ex6, 0.3), (ExampleId::Ex4, 0.5)] {
        scenarios.push(ScenarioEntry::from_spec(&ScenarioSpec::new(ex, 64, 5.0, tau, 10)));
    }
    let base = ExperimentConfig {
        name: "det".into(),
        replications: 4,
        base_seed: 1010,
        timing: false,
        diagnostics: true,
        scenarios,
        ..Default::default()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d8 = tempfile::tempdir().unwrap();
    let o1 = run_experiment(&ExperimentConfig { jobs: 1, out_dir: d1.path().into(), ..base.clone() }).unwrap();
    let o8 = run_experiment(&ExperimentConfig { jobs: 8, out_dir: d8.path().into(), ..base }).unwrap();
    let mut files = vec![(o1.paths.records, o8.paths.records), (o1.paths.aggregate, o8.paths.aggregate)];
    for ((_, a), (_, b)) in o1.paths.plotdata.into_iter().zip(o8.paths.plotdata) {
        files.push((a, b));
    }
    let mut identical = 0;
    let mut first_diff = String::new();
    for (a, b) in &files {
        let (ta, tb) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
        if ta == tb {
            identical += 1;
        } else if first_diff.is_empty() {
            if let Some((la, lb)) = ta.lines().zip(tb.lines()).find(|(x, y)| x != y) {
                first_diff =
                    format!("; first difference in {}: `{la}` vs `{lb}`", a.file_name().unwrap().to_string_lossy());
            }
        }
    }
    outcome(
        identical == files.len(),
        format!("{identical}/{} CSV files byte-identical across --jobs 1 and --jobs 8{first_diff}", files.len()),
    )
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "calibration identities", c1_calibration_identities),
        (2, "surrogate unbiasedness", c2_unbiasedness),
        (3, "inner solver vs reference", c3_inner_solver),
        (4, "penalty calculus", c4_penalty_calculus),
        (5, "l1-ball projection", c5_l1_projection),
        (6, "max-norm ADMM", c6_admm),
        (7, "three-model comparison", c7_table1),
        (8, "sign consistency", c8_sign_consistency),
        (9, "calibration speed vs ADMM", c9_calibration_speed),
        (10, "parallel-serial determinism", c10_parallel_determinism),
    ];
    let mut failed = Vec::new();
    for (k, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {status} {name} ({:.1} s): {}", secs(start.elapsed()), o.detail);
        if !o.pass {
            failed.push(k);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
