//! Ready-made configurations for the fixed-support table and the alpha sweeps.

use super::{ExperimentConfig, Method, ScenarioEntry};
use crate::simulation::{Corruption, ExampleId, ScenarioSpec};

/// Fixed-support comparison: AR(1) design, `p = 250`, `n = 100`, additive
/// (`tau = 1`), multiplicative (`tau = 0.8`) and missing (`tau = 0.5`) corruption.
pub fn table1(replications: usize) -> ExperimentConfig {
    let scenarios = [(Corruption::Additive, 1.0), (Corruption::Multiplicative, 0.8), (Corruption::Missing, 0.5)]
        .into_iter()
        .map(|(c, tau)| ScenarioEntry::from_spec(&ScenarioSpec::fixed52(c, tau, 0)))
        .collect();
    ExperimentConfig { name: "table1".into(), replications, scenarios, ..Default::default() }
}

/// `4.0, 4.2, ..., 6.0`.
pub fn alpha_sweep() -> Vec<f64> {
    (0..11).map(|j| 4.0 + 0.2 * j as f64).collect()
}

/// One curve family: the example at its corruption level(s), one scenario per alpha.
///
/// Families follow the figures: Ex1 at `sigma` 0.5 and 1.0 (unit additive noise),
/// Ex2-Ex5 at two noise levels, Ex6-Ex7 at missing rates 0.3 and 0.5, Ex8 at
/// `tau = 0.75` with `p = 250` and without NCL.
pub fn figure_family(example: ExampleId, p: usize, alphas: &[f64], replications: usize) -> ExperimentConfig {
    let levels: Vec<(f64, f64)> = match example {
        ExampleId::Ex1 => vec![(1.0, 0.5), (1.0, 1.0)],
        ExampleId::Ex2 | ExampleId::Ex3 => vec![(0.5, 0.5), (1.0, 0.5)],
        ExampleId::Ex4 | ExampleId::Ex5 => vec![(0.5, 0.5), (0.8, 0.5)],
        ExampleId::Ex6 | ExampleId::Ex7 => vec![(0.3, 0.5), (0.5, 0.5)],
        ExampleId::Ex8 => vec![(0.75, 0.5)],
        ExampleId::Fixed52 => return table1(replications),
    };
    let mut scenarios = Vec::new();
    for &(tau, sigma) in &levels {
        for &alpha in alphas {
            let mut spec = ScenarioSpec::new(example, p, alpha, tau, 0);
            spec.sigma_noise = sigma;
            scenarios.push(ScenarioEntry::from_spec(&spec));
        }
    }
    let methods =
        if example == ExampleId::Ex8 { vec![Method::Caznrls, Method::Cocolasso] } else { Method::ALL.to_vec() };
    ExperimentConfig {
        name: format!("figure_{}", example.to_string().to_ascii_lowercase()),
        replications,
        methods,
        scenarios,
        ..Default::default()
    }
}

/// Dimension the figures use for an example.
pub fn figure_dimension(example: ExampleId) -> usize {
    match example {
        ExampleId::Ex1 => 500,
        ExampleId::Ex8 | ExampleId::Fixed52 => 250,
        _ => 1000,
    }
}
