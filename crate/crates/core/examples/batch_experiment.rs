//! A small seeded batch of simulate-and-calibrate runs with summary
//! statistics and histogram files.
//!
//! Run with `cargo run --release --example batch_experiment -- [n_runs] [out_dir]`.

use std::path::PathBuf;

use vasicek_gp::harness::{run_experiment, ExperimentConfig, GridSpec};

fn main() -> vasicek_gp::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_runs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let out = args.next().map(PathBuf::from);

    let mut cfg = ExperimentConfig::single_curve_default();
    cfg.n_runs = n_runs;
    cfg.grid = GridSpec::one_year(100);
    cfg.master_seed = 2024;
    cfg.output_dir = out.clone();

    let result = run_experiment(&cfg)?;
    let s = &result.summary;
    println!("{} runs, {} converged, {} failed", s.n_runs, s.n_converged, s.n_failed);
    if let Some(block) = s.converged.as_ref().or(s.all.as_ref()) {
        for p in &block.params {
            println!("{:<6} mean {:>8.4}  sd {:>8.4}  range [{:.4}, {:.4}]", p.name, p.mean, p.stdev, p.min, p.max);
        }
    }
    if let Some(dir) = out {
        println!("outputs in {}", dir.display());
    }
    Ok(())
}
