//! Compares the closed-form covariance of log-bond prices with sample
//! covariances from simulated factor pairs.
//!
//! Run with `cargo run --release --example kernel_monte_carlo -- [draws]`.

use vasicek_gp::affine::{affine_b, cov_log_bond};
use vasicek_gp::simulator::{rng_from_seed, simulate_correlated_ou};
use vasicek_gp::{CurveId, ModelParams, MultiCurveParams, SingleCurveParams, TimeGrid};

fn cov(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0)
}

fn main() -> vasicek_gp::Result<()> {
    let draws: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?;
    let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8)?;
    let m = MultiCurveParams::new(f1, f2, 0.5)?;
    let params: ModelParams = m.into();
    let maturity = 1.5;
    let times = [0.25, 0.5, 1.0];
    let grid = TimeGrid::new(times.to_vec(), maturity)?;

    let mut rng = rng_from_seed(1);
    let mut zero = vec![Vec::with_capacity(draws); 3];
    let mut delta = vec![Vec::with_capacity(draws); 3];
    for _ in 0..draws {
        let (a, b) = simulate_correlated_ou(&m, &grid, &mut rng);
        for k in 0..3 {
            let b1 = affine_b(f1.kappa, maturity - times[k])?;
            let b2 = affine_b(f2.kappa, maturity - times[k])?;
            zero[k].push(-b1 * a[k]);
            delta[k].push(-b1 * a[k] + b2 * b[k]);
        }
    }

    println!("{:>5} {:>5} {:>6} {:>12} {:>12}", "s", "t", "block", "closed form", "sample");
    for i in 0..3 {
        for j in 0..3 {
            for (label, ca, cb, xa, xb) in [
                ("00", CurveId::Zero, CurveId::Zero, &zero, &zero),
                ("0d", CurveId::Zero, CurveId::Delta, &zero, &delta),
                ("dd", CurveId::Delta, CurveId::Delta, &delta, &delta),
            ] {
                let exact = cov_log_bond(&params, ca, cb, times[i], times[j], maturity)?;
                println!(
                    "{:>5} {:>5} {:>6} {:>12.4e} {:>12.4e}",
                    times[i],
                    times[j],
                    label,
                    exact,
                    cov(&xa[i], &xb[j])
                );
            }
        }
    }
    Ok(())
}
