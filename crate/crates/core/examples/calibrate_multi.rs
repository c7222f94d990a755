//! Joint calibration of the two-factor model on a zero curve and a
//! tenor curve simulated from the same factor path.
//!
//! Run with `cargo run --release --example calibrate_multi -- [seed] [rho]`.

use std::time::Instant;

use vasicek_gp::optimize::calibrate;
use vasicek_gp::simulator::{rng_from_seed, simulate_seeded};
use vasicek_gp::{
    CurveId, ModelKind, ModelParams, MultiCurveParams, ObservationSet, OptimizerConfig, SingleCurveParams, TimeGrid,
};

fn main() -> vasicek_gp::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let rho: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.0);

    let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?;
    let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8)?;
    let truth: ModelParams = MultiCurveParams::new(f1, f2, rho)?.into();
    let grid = TimeGrid::multi_curve_default();
    let series = simulate_seeded(&truth, &[CurveId::Zero, CurveId::Delta], &grid, seed)?;
    let obs = ObservationSet::from_series(&series, 0.0)?;

    let start = Instant::now();
    let fit = calibrate(&obs, ModelKind::Multi, rho, &OptimizerConfig::default(), &mut rng_from_seed(seed + 1))?;

    for (name, (t, l)) in ModelKind::Multi
        .param_names()
        .iter()
        .zip(truth.to_vec().iter().zip(fit.params.to_vec()))
    {
        println!("{name:<8}  truth {t:>8.4}  learned {l:>8.4}");
    }
    println!("nll       {:.6}", fit.final_nll);
    println!("converged {} after {} iterations", fit.converged, fit.iterations);
    println!("elapsed   {:.2?}", start.elapsed());
    Ok(())
}
