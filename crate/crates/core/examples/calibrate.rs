//! Build an indefinite surrogate from additively corrupted data and calibrate it.

use caznrls::simulation::{generate, Corruption, ExampleId, ScenarioSpec};
use caznrls::{calibrate_with_policy, EpsPolicy};

fn main() -> caznrls::Result<()> {
    let mut spec = ScenarioSpec::new(ExampleId::Ex2, 200, 5.0, 0.75, 7);
    spec.corruption = Some(Corruption::Additive);
    let ds = generate(&spec)?;
    let pair = ds.error_model().surrogate(&ds.z, &ds.y)?;

    let raw = pair.sigma_hat.clone().symmetric_eigenvalues();
    let cal = calibrate_with_policy(&pair, EpsPolicy::default())?;
    let fixed = cal.sigma_tilde.clone().symmetric_eigenvalues();

    println!("n = {}, p = {}", ds.n(), ds.p());
    println!("surrogate eigenvalues in [{:.3}, {:.3}]", raw.min(), raw.max());
    println!("calibrated eigenvalues in [{:.3}, {:.3}], floor {:.3}", fixed.min(), fixed.max(), cal.eps_hat);
    let n = cal.n as f64;
    println!(
        "||Z'Z/n - sigma_tilde||_F = {:.1e}, ||Z'y/n - xi_hat||_inf = {:.1e}",
        (cal.z_tilde.tr_mul(&cal.z_tilde) / n - &cal.sigma_tilde).norm(),
        (cal.z_tilde.tr_mul(&cal.y_tilde) / n - &pair.xi_hat).amax()
    );
    Ok(())
}
