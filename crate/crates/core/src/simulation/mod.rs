//! Synthetic errors-in-variables scenarios with seeded reproducibility.

mod io;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{param_err, Error, Result};
use crate::surrogate::ErrorModel;

pub use io::{load_dataset, read_dataset, save_dataset, write_dataset};

pub type SimRng = ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ExampleId {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
    Ex6,
    Ex7,
    Ex8,
    Fixed52,
}

impl ExampleId {
    pub const ALL: [ExampleId; 9] = [
        ExampleId::Ex1,
        ExampleId::Ex2,
        ExampleId::Ex3,
        ExampleId::Ex4,
        ExampleId::Ex5,
        ExampleId::Ex6,
        ExampleId::Ex7,
        ExampleId::Ex8,
        ExampleId::Fixed52,
    ];

    /// Corruption mechanism the example prescribes.
    pub fn default_corruption(self) -> Corruption {
        match self {
            ExampleId::Ex1 | ExampleId::Ex2 | ExampleId::Ex3 | ExampleId::Ex8 | ExampleId::Fixed52 => {
                Corruption::Additive
            }
            ExampleId::Ex4 | ExampleId::Ex5 => Corruption::Multiplicative,
            ExampleId::Ex6 | ExampleId::Ex7 => Corruption::Missing,
        }
    }

    pub fn default_sparsity(self, p: usize) -> usize {
        match self {
            ExampleId::Fixed52 => 3,
            _ => ((0.5 * (p as f64).sqrt()).floor() as usize).max(1),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        ExampleId::ALL
            .into_iter()
            .find(|e| {
                e.to_string().to_ascii_lowercase() == t
                    || (t.len() == 1 && format!("ex{t}") == e.to_string().to_ascii_lowercase())
            })
            .ok_or_else(|| param_err(format!("unknown example '{s}' (expected Ex1..Ex8 or Fixed52)")))
    }
}

impl TryFrom<String> for ExampleId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ExampleId> for String {
    fn from(e: ExampleId) -> String {
        e.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    /// `Z = X`, reported as additive noise with zero covariance.
    None,
    Additive,
    Multiplicative,
    Missing,
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Corruption::None => "none",
            Corruption::Additive => "additive",
            Corruption::Multiplicative => "multiplicative",
            Corruption::Missing => "missing",
        };
        f.write_str(s)
    }
}

impl FromStr for Corruption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "clean" => Ok(Corruption::None),
            "additive" => Ok(Corruption::Additive),
            "multiplicative" => Ok(Corruption::Multiplicative),
            "missing" => Ok(Corruption::Missing),
            other => Err(param_err(format!("unknown corruption '{other}'"))),
        }
    }
}

impl Corruption {
    /// Oracle error model for level `tau` in dimension `p`.
    pub fn error_model(self, tau: f64, p: usize) -> ErrorModel {
        match self {
            Corruption::None => ErrorModel::Additive { sigma_a: DMatrix::zeros(p, p) },
            Corruption::Additive => ErrorModel::Additive { sigma_a: DMatrix::identity(p, p) * (tau * tau) },
            Corruption::Multiplicative => {
                // ln M_ij ~ N(0, tau^2): E M = e^{tau^2/2}, E M^2 = e^{2 tau^2}, independent entries.
                let t2 = tau * tau;
                let mean = (t2 / 2.0).exp();
                let var = (2.0 * t2).exp() - t2.exp();
                ErrorModel::Multiplicative {
                    mu_m: DVector::from_element(p, mean),
                    sigma_m: DMatrix::identity(p, p) * var,
                }
            }
            Corruption::Missing => ErrorModel::Missing { tau },
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioSpec {
    pub example_id: ExampleId,
    pub p: usize,
    pub s: usize,
    pub alpha: f64,
    /// Overrides `floor(alpha s ln p)`.
    pub n: Option<usize>,
    pub tau: f64,
    pub sigma_noise: f64,
    pub seed: u64,
    /// Overrides the example's own corruption mechanism.
    pub corruption: Option<Corruption>,
    /// Rescale the clean design columns to squared norm `n`.
    pub normalize: bool,
}

impl ScenarioSpec {
    /// Scenario with the example's default sparsity, `sigma = 0.5` and no overrides.
    pub fn new(example_id: ExampleId, p: usize, alpha: f64, tau: f64, seed: u64) -> Self {
        Self {
            example_id,
            p,
            s: example_id.default_sparsity(p),
            alpha,
            n: None,
            tau,
            sigma_noise: 0.5,
            seed,
            corruption: None,
            normalize: false,
        }
    }

    /// Fixed-support setting: AR(1) design, `p = 250`, `n = 100`.
    pub fn fixed52(corruption: Corruption, tau: f64, seed: u64) -> Self {
        Self { n: Some(100), corruption: Some(corruption), ..Self::new(ExampleId::Fixed52, 250, 0.0, tau, seed) }
    }

    pub fn sample_size(&self) -> usize {
        self.n.unwrap_or_else(|| sample_size(self.alpha, self.s, self.p))
    }

    pub fn corruption(&self) -> Corruption {
        self.corruption.unwrap_or_else(|| self.example_id.default_corruption())
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 4 {
            return Err(param_err(format!("p = {} must be at least 4", self.p)));
        }
        if self.s < 1 || self.s > self.p {
            return Err(param_err(format!("s = {} must lie in [1, p]", self.s)));
        }
        if self.example_id == ExampleId::Fixed52 && (self.s != 3 || self.p < 5) {
            return Err(param_err("Fixed52 needs s = 3 and p >= 5"));
        }
        if self.n.is_none() && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(param_err(format!("alpha = {} must be positive", self.alpha)));
        }
        if self.sample_size() < 1 {
            return Err(param_err("sample size is zero after the floor"));
        }
        if !(self.sigma_noise >= 0.0) {
            return Err(param_err("sigma_noise must be nonnegative"));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(param_err(format!("tau = {} must be nonnegative", self.tau)));
        }
        if self.corruption() == Corruption::Missing && self.tau >= 1.0 {
            return Err(param_err(format!("missing rate tau = {} must be below 1", self.tau)));
        }
        Ok(())
    }

    /// Same scenario under replication seed `derive_seed(self.seed, rep)`.
    pub fn replicate(&self, rep: u64) -> Self {
        Self { seed: derive_seed(self.seed, rep), ..self.clone() }
    }
}

/// `floor(alpha s ln p)`.
pub fn sample_size(alpha: f64, s: usize, p: usize) -> usize {
    (alpha * s as f64 * (p as f64).ln()).floor() as usize
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replication `rep`, independent of how replications are scheduled.
pub fn derive_seed(base: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(base) ^ splitmix64(rep.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub y: DVector<f64>,
    pub beta_star: DVector<f64>,
    /// Sorted indices of the nonzeros of `beta_star`.
    pub support: Vec<usize>,
    pub corruption: Corruption,
    pub tau: f64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn p(&self) -> usize {
        self.z.ncols()
    }

    pub fn error_model(&self) -> ErrorModel {
        self.corruption.error_model(self.tau, self.p())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMode {
    RandomNormal,
    Fixed52,
}

/// True coefficients and their sorted support.
pub fn gen_beta(p: usize, s: usize, mode: BetaMode, rng: &mut impl Rng) -> (DVector<f64>, Vec<usize>) {
    let mut beta = DVector::zeros(p);
    match mode {
        BetaMode::Fixed52 => {
            beta[0] = 3.0;
            beta[1] = 1.5;
            beta[4] = 2.0;
            (beta, vec![0, 1, 4])
        }
        BetaMode::RandomNormal => {
            let mut support = index::sample(rng, p, s).into_vec();
            support.sort_unstable();
            for &i in &support {
                beta[i] = rng.sample(StandardNormal);
            }
            (beta, support)
        }
    }
}

fn laplace(rng: &mut impl Rng, scale: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Clean `n x p` design for the example.
pub fn gen_design(example: ExampleId, n: usize, p: usize, support: &[usize], rng: &mut impl Rng) -> DMatrix<f64> {
    match example {
        ExampleId::Ex1 | ExampleId::Ex2 | ExampleId::Ex4 | ExampleId::Ex6 => {
            DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
        }
        ExampleId::Ex3 => DMatrix::from_fn(n, p, |_, _| rng.random::<f64>()),
        ExampleId::Ex5 => {
            let b = std::f64::consts::FRAC_1_SQRT_2;
            DMatrix::from_fn(n, p, |_, _| laplace(rng, b))
        }
        ExampleId::Ex7 => DMatrix::from_fn(n, p, |_, _| Exp1.sample(rng)),
        ExampleId::Ex8 => {
            let mut on = vec![false; p];
            for &i in support {
                on[i] = true;
            }
            DMatrix::from_fn(n, p, |_, j| {
                let g: f64 = rng.sample(StandardNormal);
                if on[j] {
                    g
                } else {
                    5.0 * g
                }
            })
        }
        ExampleId::Fixed52 => ar1_design(n, p, 0.5, rng),
    }
}

/// Rows `N(0, Sigma)` with `Sigma_ij = r^{|i-j|}`, drawn as `L g` for the Cholesky factor `L`.
fn ar1_design(n: usize, p: usize, r: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let sigma = DMatrix::from_fn(p, p, |i, j| r.powi((i as i32 - j as i32).abs()));
    let l = sigma.cholesky().expect("AR(1) covariance is positive definite").unpack();
    let g = DMatrix::from_fn(p, n, |_, _| rng.sample(StandardNormal));
    (l * g).transpose()
}

/// Corrupted design.
pub fn corrupt(x: &DMatrix<f64>, corruption: Corruption, tau: f64, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    let mut z = x.clone();
    match corruption {
        Corruption::None => {}
        Corruption::Additive => {
            if tau > 0.0 {
                for v in z.iter_mut() {
                    let a: f64 = rng.sample(StandardNormal);
                    *v += tau * a;
                }
            }
        }
        Corruption::Multiplicative => {
            for v in z.iter_mut() {
                let g: f64 = rng.sample(StandardNormal);
                *v *= (tau * g).exp();
            }
        }
        Corruption::Missing => {
            if !(0.0..1.0).contains(&tau) {
                return Err(param_err(format!("missing rate tau = {tau} must lie in [0, 1)")));
            }
            for v in z.iter_mut() {
                if rng.random::<f64>() < tau {
                    *v = 0.0;
                }
            }
        }
    }
    Ok(z)
}

/// `y = X beta + eps`, `eps ~ N(0, sigma^2 I)`.
pub fn gen_response(x: &DMatrix<f64>, beta_star: &DVector<f64>, sigma: f64, rng: &mut impl Rng) -> DVector<f64> {
    let mut y = x * beta_star;
    if sigma > 0.0 {
        for v in y.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *v += sigma * e;
        }
    }
    y
}

fn normalize_columns(x: &mut DMatrix<f64>) {
    let n = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col *= n.sqrt() / norm;
        }
    }
}

/// Draw the full dataset for `spec`; identical specs give identical datasets.
pub fn generate(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let n = spec.sample_size();
    let mode = if spec.example_id == ExampleId::Fixed52 { BetaMode::Fixed52 } else { BetaMode::RandomNormal };
    let (beta_star, support) = gen_beta(spec.p, spec.s, mode, &mut rng);
    let mut x = gen_design(spec.example_id, n, spec.p, &support, &mut rng);
    if spec.normalize {
        normalize_columns(&mut x);
    }
    let corruption = spec.corruption();
    let z = corrupt(&x, corruption, spec.tau, &mut rng)?;
    let y = gen_response(&x, &beta_star, spec.sigma_noise, &mut rng);
    Ok(Dataset { x, z, y, beta_star, support, corruption, tau: spec.tau })
}
