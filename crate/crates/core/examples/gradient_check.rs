//! Analytic marginal-likelihood gradient next to a central finite
//! difference, for both model kinds.

use vasicek_gp::gpr::{log_marginal_likelihood, log_marginal_likelihood_grad};
use vasicek_gp::optimize::fd_gradient;
use vasicek_gp::simulator::simulate_seeded;
use vasicek_gp::{ModelParams, MultiCurveParams, ObservationSet, SingleCurveParams, TimeGrid};

fn main() -> vasicek_gp::Result<()> {
    let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?;
    let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8)?;
    let grid = TimeGrid::uniform(60, 1.0 / 60.0, 61.0 / 60.0)?;
    for params in [ModelParams::from(f1), MultiCurveParams::new(f1, f2, 0.2)?.into()] {
        let kind = params.kind();
        let obs = ObservationSet::from_series(&simulate_seeded(&params, kind.curves(), &grid, 2)?, 0.0)?;
        let probe = ModelParams::from_slice(kind, &params.to_vec().iter().map(|x| x * 1.1).collect::<Vec<_>>(), params.rho())?;
        let analytic = log_marginal_likelihood_grad(&probe, &obs)?.gradient;
        let numeric = fd_gradient(
            |x| {
                ModelParams::from_slice(kind, x, params.rho())
                    .and_then(|q| log_marginal_likelihood(&q, &obs))
                    .unwrap_or(f64::NAN)
            },
            &probe.to_vec(),
        );
        println!("{kind:?}");
        for ((name, a), n) in kind.param_names().iter().zip(&analytic).zip(&numeric) {
            println!("  {name:<8} analytic {a:>14.6e}  finite diff {n:>14.6e}");
        }
    }
    Ok(())
}
