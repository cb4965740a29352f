//! Multi-stage zero-norm fit: watch the weights and the estimation error stage by stage.

use caznrls::gep::{fit, GepConfig};
use caznrls::simulation::{generate, ExampleId, ScenarioSpec};
use caznrls::{calibrate_with_policy, EpsPolicy};

fn main() -> caznrls::Result<()> {
    let ds = generate(&ScenarioSpec::new(ExampleId::Ex2, 300, 6.0, 0.5, 11))?;
    let pair = ds.error_model().surrogate(&ds.z, &ds.y)?;
    let cal = calibrate_with_policy(&pair, EpsPolicy::default())?;

    let cfg = GepConfig { lambda: 0.15 * cal.lambda_max(), ..GepConfig::default() };
    let res = fit(&cal, &cfg)?;
    for (k, st) in res.iterates.iter().enumerate() {
        // w_i = 1 lifts the penalty on coordinate i entirely.
        let released = st.w.iter().filter(|&&w| w == 1.0).count();
        println!(
            "stage {k}: nnz {:>3}, rho {:>8.3}, loss {:>8.4}, released {:>3}, error {:.4}",
            st.nnz,
            st.rho,
            st.loss,
            released,
            (&st.beta - &ds.beta_star).norm()
        );
    }
    println!("stopped by {:?} after {} stages", res.stopped_by, res.stages_run);
    println!("true support {:?}", ds.support);
    println!("estimated    {:?}", res.support);
    Ok(())
}
