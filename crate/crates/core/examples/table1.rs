//! Small-scale run of the three-model comparison. Pass a replication count
//! (default 3) and optionally an output directory.

use caznrls::experiment::{presets, run_experiment, ExperimentConfig};

fn main() -> caznrls::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let out_dir = args.next().map_or_else(|| std::env::temp_dir().join("caznrls_table1"), Into::into);
    let cfg = ExperimentConfig {
        out_dir,
        jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..presets::table1(reps)
    };
    let out = run_experiment(&cfg)?;
    println!("{:<15} {:<10} {:>6} {:>5} {:>5}", "corruption", "method", "rmse", "nc", "nic");
    for a in &out.aggregates {
        println!(
            "{:<15} {:<10} {:>6.3} {:>5.2} {:>5.2}",
            a.corruption.to_string(),
            a.method.to_string(),
            a.mean_rmse,
            a.mean_nc,
            a.mean_nic
        );
    }
    println!("records in {}", out.paths.records.display());
    Ok(())
}
