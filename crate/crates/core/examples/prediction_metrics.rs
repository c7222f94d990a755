//! Scores the posterior on a 70/30 prefix split with SMSE and MSLL, once
//! with the true parameters and once with deliberately wrong ones.

use vasicek_gp::metrics::{split_and_evaluate, SplitSpec};
use vasicek_gp::simulator::simulate_seeded;
use vasicek_gp::{CurveId, ModelParams, ObservationSet, SingleCurveParams, TimeGrid};

fn main() -> vasicek_gp::Result<()> {
    let truth: ModelParams = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?.into();
    let wrong: ModelParams = SingleCurveParams::new(0.2, 0.5, 0.4, 0.6)?.into();
    let series = simulate_seeded(&truth, &[CurveId::Zero], &TimeGrid::single_curve_default(), 9)?;
    let obs = ObservationSet::from_series(&series, 0.0)?;

    let spec = SplitSpec::default();
    for (label, p) in [("true", &truth), ("wrong", &wrong)] {
        let r = split_and_evaluate(p, &obs, &spec)?;
        println!("{label:<6} smse {:>10.4e}  msll {:>9.3}  n {}", r.smse, r.msll, r.residuals.len());
    }
    Ok(())
}
