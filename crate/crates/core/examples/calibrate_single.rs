//! Simulates one single-curve series and recovers its parameters by
//! maximizing the marginal likelihood.
//!
//! Run with `cargo run --release --example calibrate_single -- [cg|adam] [seed]`.

use std::time::Instant;

use vasicek_gp::optimize::calibrate;
use vasicek_gp::simulator::{rng_from_seed, simulate_seeded};
use vasicek_gp::{CurveId, Method, ModelKind, ModelParams, ObservationSet, OptimizerConfig, SingleCurveParams, TimeGrid};

fn main() -> vasicek_gp::Result<()> {
    let mut args = std::env::args().skip(1);
    let method: Method = args.next().as_deref().unwrap_or("cg").parse()?;
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let truth: ModelParams = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?.into();
    let grid = TimeGrid::single_curve_default();
    let series = simulate_seeded(&truth, &[CurveId::Zero], &grid, seed)?;
    let obs = ObservationSet::from_series(&series, 0.0)?;

    let cfg = match method {
        Method::Cg => OptimizerConfig::default(),
        Method::Adam => OptimizerConfig::adam(700),
    };
    let start = Instant::now();
    let fit = calibrate(&obs, ModelKind::Single, 0.0, &cfg, &mut rng_from_seed(seed.wrapping_add(1)))?;
    let elapsed = start.elapsed();

    println!("method      {method:?}");
    for (name, (t, l)) in ModelKind::Single
        .param_names()
        .iter()
        .zip(truth.to_vec().iter().zip(fit.params.to_vec()))
    {
        println!("{name:<10}  truth {t:>8.4}  learned {l:>8.4}");
    }
    println!("nll         {:.6}", fit.final_nll);
    println!("converged   {} after {} iterations, {} evaluations", fit.converged, fit.iterations, fit.evaluations);
    println!("|grad|      {:.3e}", fit.grad_norm_final);
    println!("jitter      {:.3e}", fit.jitter_used);
    println!("elapsed     {:.2?}", elapsed);
    Ok(())
}
