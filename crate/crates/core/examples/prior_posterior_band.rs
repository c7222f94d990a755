//! Prior band, smoothing band and filtering band for one simulated path.
//!
//! Conditions on the first half of the series, then on the first half
//! plus one late observation, and prints the 95% band width at a few
//! target times.

use vasicek_gp::gpr::{confidence_band, posterior};
use vasicek_gp::harness::predict_band;
use vasicek_gp::simulator::simulate_seeded;
use vasicek_gp::{CurveId, ModelParams, ObservationSet, PredictionRequest, SingleCurveParams, TimeGrid};

fn main() -> vasicek_gp::Result<()> {
    let params: ModelParams = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?.into();
    let grid = TimeGrid::uniform(100, 0.01, 1.01)?;
    let series = simulate_seeded(&params, &[CurveId::Zero], &grid, 3)?;
    let obs = ObservationSet::from_series(&series, 0.0)?;

    let times = [0.1, 0.3, 0.55, 0.7, 0.9];
    let req = PredictionRequest::grid(&times, &[CurveId::Zero])?;

    let prior = confidence_band(&posterior(&params, &ObservationSet::empty(grid.maturity(), &[CurveId::Zero])?, &req)?, 0.95)?;
    let half = predict_band(&obs, &params, 50, &[], &req, 0.95)?;
    let late = predict_band(&obs, &params, 50, &[89], &req, 0.95)?;

    println!("{:>6} {:>12} {:>12} {:>12}", "t", "prior", "first half", "+ t=0.90");
    for i in 0..times.len() {
        println!(
            "{:>6.2} {:>12.3e} {:>12.3e} {:>12.3e}",
            times[i],
            prior[i].upper - prior[i].lower,
            half[i].upper - half[i].lower,
            late[i].upper - late[i].lower
        );
    }
    Ok(())
}
