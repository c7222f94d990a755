//! Simulates a two-curve series and writes it as CSV with a JSON sidecar.
//!
//! Run with `cargo run --example simulate_series -- [out.csv] [seed]`.

use std::path::PathBuf;

use vasicek_gp::simulator::simulate_seeded;
use vasicek_gp::{io, CurveId, ModelParams, MultiCurveParams, SingleCurveParams, TimeGrid};

fn main() -> vasicek_gp::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "series.csv".into()));
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2)?;
    let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8)?;
    let params: ModelParams = MultiCurveParams::new(f1, f2, 0.0)?.into();
    let grid = TimeGrid::multi_curve_default();
    let series = simulate_seeded(&params, &[CurveId::Zero, CurveId::Delta], &grid, seed)?;

    io::write_series(&out, &series)?;
    println!("wrote {} points per curve to {}", grid.len(), out.display());
    println!("sidecar {}", io::sidecar_path(&out).display());
    for (curve, values) in &series.curves {
        let first = values.first().copied().unwrap_or(f64::NAN);
        let last = values.last().copied().unwrap_or(f64::NAN);
        println!("{curve:<6} first {first:>10.6}  last {last:>10.6}");
    }
    Ok(())
}
