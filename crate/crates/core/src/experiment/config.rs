use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{AdmmParams, NclParams};
use crate::calibration::EpsPolicy;
use crate::error::{Error, Result};
use crate::gep::GepConfig;
use crate::simulation::{Corruption, ExampleId, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Caznrls,
    Cocolasso,
    Ncl,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Caznrls, Method::Cocolasso, Method::Ncl];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Caznrls => "caznrls",
            Method::Cocolasso => "cocolasso",
            Method::Ncl => "ncl",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "caznrls" => Ok(Method::Caznrls),
            "cocolasso" => Ok(Method::Cocolasso),
            "ncl" => Ok(Method::Ncl),
            other => Err(Error::Config(format!("unknown method '{other}' (caznrls, cocolasso, ncl)"))),
        }
    }
}

/// Parse a comma-separated method list.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let v: Vec<Method> = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    Ok(v)
}

/// `[0.06, 0.08, ..., 0.32]`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..14).map(|k| (6 + 2 * k) as f64 / 100.0).collect()
}

/// Matrix used in the held-out loss `1/2 b^T S b - <xi_hat_v, b>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvScore {
    /// `S = sigma_hat_v`, the raw held-out surrogate (may be indefinite).
    Surrogate,
    /// `S` = PSD calibration of `sigma_hat_v` with the same eps policy.
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub alpha_grid: Vec<f64>,
    pub lambda_floor: f64,
    pub score: CvScore,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 5, alpha_grid: default_alpha_grid(), lambda_floor: 0.01, score: CvScore::Calibrated }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config("cv.folds must be at least 2".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::Config("cv.alpha_grid is empty".into()));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(0.06 - 1e-12..=0.32 + 1e-12).contains(*a)) {
            return Err(Error::Config(format!("cv.alpha_grid value {a} outside [0.06, 0.32]")));
        }
        if !(self.lambda_floor >= 0.0) {
            return Err(Error::Config("cv.lambda_floor must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Solver settings shared by CV and the final fits.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Threshold below which coefficients count as zero in the metrics.
    pub zero_threshold: f64,
    pub eps: EpsPolicy,
    pub gep: GepConfig,
    pub admm: AdmmParams,
    /// `radius` is replaced by `||beta_star||_1` in simulations.
    pub ncl: NclParams,
}

impl SolverSettings {
    pub fn new() -> Self {
        Self { zero_threshold: 1e-8, ..Default::default() }
    }
}

/// Scenario entry of a configuration file. Missing `s` takes the example default.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub example: ExampleId,
    pub p: usize,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    pub tau: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub corruption: Option<Corruption>,
    #[serde(default)]
    pub normalize: bool,
}

fn default_sigma() -> f64 {
    0.5
}

impl ScenarioEntry {
    pub fn to_spec(&self) -> ScenarioSpec {
        let mut spec = ScenarioSpec::new(self.example, self.p, self.alpha.unwrap_or(0.0), self.tau, self.seed);
        if let Some(s) = self.s {
            spec.s = s;
        }
        spec.n = self.n;
        spec.sigma_noise = self.sigma;
        spec.corruption = self.corruption;
        spec.normalize = self.normalize;
        spec
    }

    pub fn from_spec(spec: &ScenarioSpec) -> Self {
        Self {
            example: spec.example_id,
            p: spec.p,
            s: Some(spec.s),
            alpha: spec.n.is_none().then_some(spec.alpha),
            n: spec.n,
            tau: spec.tau,
            sigma: spec.sigma_noise,
            seed: spec.seed,
            corruption: spec.corruption,
            normalize: spec.normalize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// File name prefix of the CSV outputs.
    pub name: String,
    pub out_dir: PathBuf,
    pub methods: Vec<Method>,
    pub replications: usize,
    /// Index of the first replication; lets a run be split into disjoint chunks.
    pub rep_start: usize,
    pub base_seed: u64,
    /// Worker threads; does not affect the output.
    pub jobs: usize,
    /// Record wall-clock times; off writes 0 so outputs are byte-reproducible.
    pub timing: bool,
    /// Append theory diagnostics to the record rows.
    pub diagnostics: bool,
    pub cv: CvConfig,
    pub solver: SolverSettings,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioEntry>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            out_dir: PathBuf::from("."),
            methods: Method::ALL.to_vec(),
            replications: 100,
            rep_start: 0,
            base_seed: 2020,
            jobs: 1,
            timing: true,
            diagnostics: false,
            cv: CvConfig::default(),
            solver: SolverSettings::new(),
            scenarios: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios configured".into()));
        }
        self.cv.validate()?;
        for (k, sc) in self.scenarios.iter().enumerate() {
            sc.to_spec().validate().map_err(|e| Error::Config(format!("scenario {k}: {e}")))?;
        }
        Ok(())
    }

    pub fn specs(&self) -> Vec<ScenarioSpec> {
        self.scenarios.iter().map(ScenarioEntry::to_spec).collect()
    }

    /// FNV-1a hash of the configuration. Parallelism and output location are
    /// masked out since neither changes the results.
    pub fn config_hash(&self) -> u64 {
        let masked = Self { jobs: 0, out_dir: PathBuf::new(), ..self.clone() };
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in masked.to_toml_string().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}
