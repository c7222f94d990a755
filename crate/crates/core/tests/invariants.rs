//! Objective and transform invariants checked on many points.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vasicek_gp::gpr::log_marginal_likelihood_at;
use vasicek_gp::linalg::JitterPolicy;
use vasicek_gp::optimize::ParamTransform;
use vasicek_gp::simulator::simulate_seeded;
use vasicek_gp::{CurveId, ModelKind, ModelParams, MultiCurveParams, ObservationSet, SingleCurveParams, TimeGrid};

#[test]
fn likelihood_ignores_observation_order() {
    let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap();
    let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8).unwrap();
    let p: ModelParams = MultiCurveParams::new(f1, f2, 0.2).unwrap().into();
    let grid = TimeGrid::uniform(40, 0.025, 1.025).unwrap();
    let obs = ObservationSet::from_series(&simulate_seeded(&p, &[CurveId::Zero, CurveId::Delta], &grid, 6).unwrap(), 1e-8)
        .unwrap();
    let (labels, y) = (obs.labels(), obs.stacked_values());
    let policy = JitterPolicy::default();
    let base = log_marginal_likelihood_at(&p, &labels, &y, obs.maturity(), obs.noise_var, &policy).unwrap().value;

    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let labels: Vec<_> = order.iter().map(|&i| labels[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let shuffled = log_marginal_likelihood_at(&p, &labels, &y, obs.maturity(), obs.noise_var, &policy).unwrap().value;
    assert!((base - shuffled).abs() <= 1e-9 * base.abs(), "{base} vs {shuffled}");
}

#[test]
fn transform_round_trips_on_many_points() {
    let t = ParamTransform::for_model(ModelKind::Multi);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10_000 {
        let p: Vec<f64> = (0..8)
            .map(|i| match i % 4 {
                1 | 3 => 10f64.powf(rng.random_range(-4.0..2.0)),
                _ => rng.random_range(-5.0..5.0),
            })
            .collect();
        let back = t.to_constrained(&t.to_unconstrained(&p).unwrap());
        for (a, b) in p.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {b}");
        }
    }
}
