use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use caznrls::baselines::cocolasso_calibrate;
use caznrls::calibration::calibrate_with_policy;
use caznrls::diagnostics::theory_report;
use caznrls::experiment::{
    corrected_cv, fit_method, metrics, parse_methods, penalty, presets, run_experiment, ExperimentConfig, FullData,
    Method, ScenarioEntry,
};
use caznrls::simulation::{generate, load_dataset, rng_from_seed, save_dataset, Corruption, ExampleId, ScenarioSpec};
use caznrls::Error;

#[derive(Parser)]
#[command(name = "caznrls", version, about = "Sparse regression with corrupted covariates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Ex1..Ex8 or Fixed52
    #[arg(long, default_value = "Ex2")]
    example: String,
    #[arg(long, default_value_t = 100)]
    p: usize,
    /// Sample-size multiplier, n = floor(alpha s ln p)
    #[arg(long, default_value_t = 5.0)]
    alpha: f64,
    /// Explicit sample size (overrides --alpha)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Response noise standard deviation
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// none, additive, multiplicative or missing (default: the example's own)
    #[arg(long)]
    corruption: Option<String>,
}

impl ScenarioArgs {
    fn spec(&self) -> Result<ScenarioSpec, Error> {
        let example: ExampleId = self.example.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        let mut spec = ScenarioSpec::new(example, self.p, self.alpha, self.tau, self.seed);
        if example == ExampleId::Fixed52 && self.n.is_none() {
            spec.n = Some(100);
        }
        if self.n.is_some() {
            spec.n = self.n;
        }
        spec.sigma_noise = self.sigma;
        if let Some(c) = &self.corruption {
            spec.corruption = Some(c.parse::<Corruption>().map_err(|e| Error::Config(e.to_string()))?);
        }
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset file
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one method on a dataset file
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "caznrls")]
        methods: String,
        /// Configuration file for solver and CV settings
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `index,value` rows of the estimate here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation study and write CSV files
    Experiment {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// TOML configuration; replaces the scenario flags
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in configuration: table1
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        methods: Option<String>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        diagnostics: bool,
        /// Write 0 for wall times so outputs are byte-reproducible
        #[arg(long)]
        no_timing: bool,
    },
    /// Corrected cross-validation only
    Cv {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "caznrls")]
        methods: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Theory quantities of a dataset
    Diagnose {
        #[arg(long)]
        data: PathBuf,
        /// Penalty used in the error bound; defaults to the CV choice
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        rec_samples: usize,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
    Partial(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Parse(_) | Error::Io(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => Ok(ExperimentConfig::load(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Simulate { scenario, out: path } => {
            let spec = scenario.spec()?;
            let ds = generate(&spec)?;
            save_dataset(&ds, &path)?;
            let _ =
                writeln!(out, "wrote {} (n = {}, p = {}, s = {})", path.display(), ds.n(), ds.p(), ds.support.len());
        }
        Command::Fit { data, methods, config, seed, out: path } => {
            let cfg = load_config(config.as_ref())?;
            let ds = load_dataset(&data)?;
            let methods = parse_methods(&methods)?;
            if methods.len() != 1 {
                return Err(Failure::Config("fit takes exactly one method".into()));
            }
            let f = fit_method(&ds, methods[0], &cfg.cv, &cfg.solver, seed)?;
            let _ = writeln!(
                out,
                "method {}  alpha_star {}  lambda {}  converged {}",
                methods[0], f.alpha_star, f.lambda, f.converged
            );
            if ds.beta_star.iter().any(|b| *b != 0.0) {
                let m = metrics(&f.beta, &ds.beta_star, cfg.solver.zero_threshold)?;
                let _ = writeln!(out, "rmse_rel {}  nc {}  nic {}  nnz {}", m.rmse_rel, m.nc, m.nic, m.nnz);
            }
            if let Some(p) = path {
                let mut text = String::from("index,value\n");
                for (i, v) in f.beta.iter().enumerate() {
                    text.push_str(&format!("{i},{v:e}\n"));
                }
                std::fs::write(&p, text).map_err(Error::from)?;
            }
            if !f.converged {
                return Err(Failure::Partial(1));
            }
        }
        Command::Experiment { scenario, config, preset, reps, methods, out: dir, jobs, diagnostics, no_timing } => {
            let mut cfg = match (&config, preset.as_deref()) {
                (Some(_), Some(_)) => return Err(Failure::Config("use either --config or --preset".into())),
                (Some(p), None) => ExperimentConfig::load(p)?,
                (None, Some("table1")) => presets::table1(100),
                (None, Some(other)) => return Err(Failure::Config(format!("unknown preset '{other}'"))),
                (None, None) => ExperimentConfig {
                    base_seed: scenario.seed,
                    scenarios: vec![ScenarioEntry::from_spec(&ScenarioSpec { seed: 0, ..scenario.spec()? })],
                    ..Default::default()
                },
            };
            if let Some(r) = reps {
                cfg.replications = r;
            }
            if let Some(m) = methods {
                cfg.methods = parse_methods(&m)?;
            }
            if let Some(d) = dir {
                cfg.out_dir = d;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            cfg.diagnostics |= diagnostics;
            if no_timing {
                cfg.timing = false;
            }
            cfg.validate()?;
            let outcome = run_experiment(&cfg)?;
            let _ = writeln!(out, "records   {}", outcome.paths.records.display());
            let _ = writeln!(out, "aggregate {}", outcome.paths.aggregate.display());
            for a in &outcome.aggregates {
                let _ = writeln!(
                    out,
                    "{:>3} {:<8} {:<14} {:<10} rmse {:.3}  nc {:.2}  nic {:.2}  time {:.0} ms  failed {}",
                    a.scenario_index,
                    a.example_id,
                    a.corruption,
                    a.method,
                    a.mean_rmse,
                    a.mean_nc,
                    a.mean_nic,
                    a.mean_time_ms,
                    a.failed
                );
            }
            let problems = outcome.problem_count();
            if problems > 0 {
                return Err(Failure::Partial(problems));
            }
        }
        Command::Cv { data, methods, config, seed } => {
            let cfg = load_config(config.as_ref())?;
            let ds = load_dataset(&data)?;
            let model = ds.error_model();
            let pair = model.surrogate(&ds.z, &ds.y)?;
            let cal = calibrate_with_policy(&pair, cfg.solver.eps)?;
            for method in parse_methods(&methods)? {
                let result = match method {
                    Method::Caznrls => {
                        corrected_cv(&ds.z, &ds.y, &model, FullData::Caznrls(&cal), &cfg.cv, &cfg.solver, seed)?
                    }
                    Method::Cocolasso => {
                        let cc = cocolasso_calibrate(&pair, cal.eps_hat, &cfg.solver.admm, None)?;
                        corrected_cv(&ds.z, &ds.y, &model, FullData::Cocolasso(&cc), &cfg.cv, &cfg.solver, seed)?
                    }
                    Method::Ncl => return Err(Failure::Config("ncl is not tuned by cross-validation".into())),
                };
                let _ = writeln!(out, "{method}: alpha_star {}  lambda {}", result.alpha_star, result.lambda);
                for (a, s) in cfg.cv.alpha_grid.iter().zip(&result.scores) {
                    let _ = writeln!(out, "  alpha {a:.2}  score {s:.6}");
                }
            }
        }
        Command::Diagnose { data, lambda, config, seed, rec_samples } => {
            let cfg = load_config(config.as_ref())?;
            let ds = load_dataset(&data)?;
            let model = ds.error_model();
            let pair = model.surrogate(&ds.z, &ds.y)?;
            let cal = calibrate_with_policy(&pair, cfg.solver.eps)?;
            let lambda = match lambda {
                Some(l) => l,
                None => {
                    let cv = corrected_cv(&ds.z, &ds.y, &model, FullData::Caznrls(&cal), &cfg.cv, &cfg.solver, seed)?;
                    penalty(cv.alpha_star, cal.lambda_max(), cfg.cv.lambda_floor)
                }
            };
            let mut rng = rng_from_seed(seed);
            let r = theory_report(&ds, &pair, &cal, lambda, rec_samples, &mut rng)?;
            let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.6}"));
            let _ = writeln!(out, "lambda                    {lambda:.6}");
            let _ = writeln!(out, "eps_hat                   {:.6}", cal.eps_hat);
            let _ = writeln!(out, "||D||_max                 {:.6}", r.d_max);
            let _ = writeln!(out, "||eps_tilde||_inf         {:.6}", r.eps_tilde_inf);
            let _ = writeln!(out, "||eps_LS||_inf            {:.6}", r.eps_ls_inf);
            let _ = writeln!(out, "||eps_dagger||_inf        {:.6}", r.eps_dagger_inf);
            let _ = writeln!(out, "kappa (sampled, upper)    {}", opt(r.kappa_hat));
            let _ = writeln!(out, "error bound               {}", opt(r.bound_thm2));
            let _ = writeln!(out, "irrepresentable number    {:.6}", r.irrepresentable);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Partial(k)) => {
            eprintln!("warning: {k} fits failed or did not converge");
            ExitCode::from(2)
        }
    }
}
