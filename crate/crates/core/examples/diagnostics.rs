//! Theory quantities for one replication: surrogate error, noise terms, REC estimate.

use caznrls::diagnostics::theory_report;
use caznrls::simulation::{generate, rng_from_seed, ExampleId, ScenarioSpec};
use caznrls::{calibrate_with_policy, EpsPolicy};

fn main() -> caznrls::Result<()> {
    let ds = generate(&ScenarioSpec::new(ExampleId::Ex1, 120, 6.0, 0.5, 4))?;
    let pair = ds.error_model().surrogate(&ds.z, &ds.y)?;
    let cal = calibrate_with_policy(&pair, EpsPolicy::default())?;
    let lambda = 0.1 * cal.lambda_max();
    let rep = theory_report(&ds, &pair, &cal, lambda, 2000, &mut rng_from_seed(9))?;
    println!("||sigma_hat - Sigma||_max      {:.4}", rep.d_max);
    println!("||xi - sigma_tilde beta*||_inf {:.4}", rep.eps_tilde_inf);
    println!("restricted LS residual         {:.4}", rep.eps_ls_inf);
    println!("irrepresentable number         {:.4}", rep.irrepresentable);
    match (rep.kappa_hat, rep.bound_thm2) {
        (Some(k), Some(b)) => println!("REC estimate {k:.4}, error bound {b:.4}"),
        (Some(k), None) => println!("REC estimate {k:.4}; error bound not applicable at this sample size"),
        _ => println!("REC estimate skipped"),
    }
    Ok(())
}
