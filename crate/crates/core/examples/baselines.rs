//! Compare CaZnRLS with CoCoLasso and the nonconvex l1-ball estimator on one dataset.

use caznrls::experiment::{fit_method, metrics, CvConfig, Method, SolverSettings};
use caznrls::simulation::{generate, Corruption, ExampleId, ScenarioSpec};

fn main() -> caznrls::Result<()> {
    let mut spec = ScenarioSpec::new(ExampleId::Ex4, 150, 5.0, 0.5, 21);
    spec.corruption = Some(Corruption::Missing);
    let ds = generate(&spec)?;
    let (cv, solver) = (CvConfig::default(), SolverSettings::new());
    println!("n = {}, p = {}, missing rate {}", ds.n(), ds.p(), ds.tau);
    for method in [Method::Caznrls, Method::Cocolasso, Method::Ncl] {
        let f = fit_method(&ds, method, &cv, &solver, 5)?;
        let m = metrics(&f.beta, &ds.beta_star, solver.zero_threshold)?;
        println!(
            "{:<10} rmse {:.3}  nc {}  nic {}  nnz {}  alpha* {:.2}",
            method.to_string(),
            m.rmse_rel,
            m.nc,
            m.nic,
            m.nnz,
            f.alpha_star
        );
    }
    Ok(())
}
