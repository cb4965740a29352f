//! Corrected cross-validation over the penalty grid.

use caznrls::experiment::{corrected_cv, CvConfig, FullData, SolverSettings};
use caznrls::simulation::{generate, ExampleId, ScenarioSpec};
use caznrls::{calibrate_with_policy, EpsPolicy};

fn main() -> caznrls::Result<()> {
    let ds = generate(&ScenarioSpec::new(ExampleId::Ex3, 200, 5.0, 0.5, 8))?;
    let model = ds.error_model();
    let cal = calibrate_with_policy(&model.surrogate(&ds.z, &ds.y)?, EpsPolicy::default())?;
    let cv = CvConfig::default();
    let out = corrected_cv(&ds.z, &ds.y, &model, FullData::Caznrls(&cal), &cv, &SolverSettings::new(), 1)?;
    for (alpha, score) in cv.alpha_grid.iter().zip(&out.scores) {
        let mark = if *alpha == out.alpha_star { " <" } else { "" };
        println!("alpha {alpha:.2}  held-out loss {score:.5}{mark}");
    }
    println!("lambda on the full data {:.4}", out.lambda);
    Ok(())
}
