//! Solve one weighted lasso with the semismooth Newton ALM and inspect its certificates.

use caznrls::wls::{solve, AlmParams, WeightedLassoProblem};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> caznrls::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let (m, p) = (120, 400);
    let z = DMatrix::from_fn(m, p, |_, _| StandardNormal.sample(&mut rng));
    let mut beta = DVector::zeros(p);
    for (k, v) in [(3, 2.0), (50, -1.5), (211, 1.0)] {
        beta[k] = v;
    }
    let y = &z * &beta + DVector::from_fn(m, |_, _| 0.3 * Distribution::<f64>::sample(&StandardNormal, &mut rng));

    // Leave the first coefficient unpenalized to show per-coordinate weights.
    let lambda = 0.1 * z.tr_mul(&y).amax();
    let mut omega = DVector::from_element(p, lambda);
    omega[3] = 0.0;

    let prob = WeightedLassoProblem::new(&z, &y, omega)?;
    let sol = solve(&prob, &AlmParams::default(), None)?;
    let support: Vec<usize> = (0..p).filter(|&i| sol.beta[i].abs() > 1e-8).collect();
    println!("support {support:?}");
    println!(
        "ALM iterations {}, Newton steps {}, CG iterations {}, converged {}",
        sol.alm_iters, sol.newton_iters_total, sol.cg_iters_total, sol.converged
    );
    println!(
        "primal {:.6}, dual {:.6}, KKT violation {:.1e}",
        prob.primal_objective(&sol.beta),
        prob.dual_objective(&sol.zeta),
        prob.kkt_violation(&sol.beta)
    );
    Ok(())
}
