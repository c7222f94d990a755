//! Exact simulation of the short-rate factors and the log-bond series
//! they imply.
//!
//! Factors are advanced with their exact Gaussian transition, so the
//! marginal law at every grid point is correct for any spacing.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::affine::{a_fn, b_fn, phi_fn, CurveId, ModelParams, MultiCurveParams, SingleCurveParams};
use crate::error::{domain, Error, Result};

/// The generator used for every simulated series.
pub type SimRng = ChaCha8Rng;

/// Per-run seed derived from a batch master seed.
pub fn sub_seed(master: u64, run: u64) -> u64 {
    master ^ run
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly increasing observation times inside `[0, maturity]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    maturity: f64,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>, maturity: f64) -> Result<Self> {
        if points.is_empty() {
            return domain("time grid needs at least one point");
        }
        Self::checked(points, maturity)
    }

    /// Grid without points; only meaningful as an empty conditioning set.
    pub fn empty(maturity: f64) -> Result<Self> {
        Self::checked(Vec::new(), maturity)
    }

    fn checked(points: Vec<f64>, maturity: f64) -> Result<Self> {
        if !(maturity.is_finite() && maturity > 0.0) {
            return domain(format!("maturity must be positive, got {maturity}"));
        }
        if let Some(bad) = points.iter().find(|t| !(t.is_finite() && (0.0..=maturity).contains(*t))) {
            return domain(format!("grid time {bad} outside [0, {maturity}]"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return domain("grid times must be strictly increasing");
        }
        Ok(TimeGrid { points, maturity })
    }

    /// `n` points `dt, 2dt, …, n·dt`.
    pub fn uniform(n: usize, dt: f64, maturity: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return domain(format!("grid spacing must be positive, got {dt}"));
        }
        Self::new((1..=n).map(|i| i as f64 * dt).collect(), maturity)
    }

    /// 250 daily points over one year; the bond matures the day after
    /// the last observation.
    pub fn single_curve_default() -> Self {
        Self::uniform(250, 1.0 / 250.0, 251.0 / 250.0).expect("valid default grid")
    }

    /// 125 points per curve over one year, maturing one step after the
    /// last observation.
    pub fn multi_curve_default() -> Self {
        Self::uniform(125, 1.0 / 125.0, 126.0 / 125.0).expect("valid default grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One simulated realization of the requested curves on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedSeries {
    pub grid: TimeGrid,
    pub curves: BTreeMap<CurveId, Vec<f64>>,
    /// Factor paths on the grid: one entry per factor.
    pub short_rates: Vec<Vec<f64>>,
    pub params: ModelParams,
    pub seed: Option<u64>,
}

fn transition_sd(p: &SingleCurveParams, dt: f64) -> f64 {
    p.sigma * (-(-2.0 * p.kappa * dt).exp_m1() / (2.0 * p.kappa)).sqrt()
}

fn drift_step(p: &SingleCurveParams, r: f64, dt: f64) -> f64 {
    p.theta + (r - p.theta) * (-p.kappa * dt).exp()
}

/// Samples the short rate at every grid point, starting from `r₀` at `t = 0`.
pub fn simulate_ou_path<R: Rng + ?Sized>(params: &SingleCurveParams, grid: &TimeGrid, rng: &mut R) -> Vec<f64> {
    let mut r = params.r0;
    let mut t = 0.0;
    grid.points()
        .iter()
        .map(|&ti| {
            let dt = ti - t;
            let z: f64 = rng.sample(StandardNormal);
            r = drift_step(params, r, dt) + transition_sd(params, dt) * z;
            t = ti;
            r
        })
        .collect()
}

/// Samples both factors jointly; the stochastic increments over each
/// step are drawn from their exact bivariate normal law.
pub fn simulate_correlated_ou<R: Rng + ?Sized>(
    params: &MultiCurveParams,
    grid: &TimeGrid,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let (f1, f2) = (&params.factor1, &params.factor2);
    let n = grid.len();
    let (mut p1, mut p2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut r1, mut r2) = (f1.r0, f2.r0);
    let mut t = 0.0;
    for &ti in grid.points() {
        let dt = ti - t;
        let v1 = f1.sigma * f1.sigma * (-(-2.0 * f1.kappa * dt).exp_m1() / (2.0 * f1.kappa));
        let v2 = f2.sigma * f2.sigma * (-(-2.0 * f2.kappa * dt).exp_m1() / (2.0 * f2.kappa));
        let ksum = f1.kappa + f2.kappa;
        let c12 = params.rho * f1.sigma * f2.sigma * (-(-ksum * dt).exp_m1() / ksum);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let (s1, s2) = (v1.sqrt(), v2.sqrt());
        let (i1, i2) = if s1 > 0.0 && s2 > 0.0 {
            let corr = (c12 / (s1 * s2)).clamp(-1.0, 1.0);
            (s1 * z1, s2 * (corr * z1 + (1.0 - corr * corr).sqrt() * z2))
        } else {
            (s1 * z1, s2 * z2)
        };
        r1 = drift_step(f1, r1, dt) + i1;
        r2 = drift_step(f2, r2, dt) + i2;
        p1.push(r1);
        p2.push(r2);
        t = ti;
    }
    (p1, p2)
}

/// Simulates log-bond prices for each requested curve from one shared
/// factor realization.
pub fn simulate_log_bonds<R: Rng + ?Sized>(
    params: &ModelParams,
    curves: &[CurveId],
    grid: &TimeGrid,
    rng: &mut R,
) -> Result<SimulatedSeries> {
    params.validate()?;
    if curves.is_empty() {
        return Err(Error::Config("no curves requested".into()));
    }
    let maturity = grid.maturity();
    let mut out = BTreeMap::new();
    let short_rates = match params {
        ModelParams::Single(p) => {
            if curves.contains(&CurveId::Delta) {
                return Err(Error::Config(
                    "the tenor-delta curve needs multi-curve parameters".into(),
                ));
            }
            let r = simulate_ou_path(p, grid, rng);
            out.insert(CurveId::Zero, zero_curve(p, grid, &r));
            vec![r]
        }
        ModelParams::Multi(m) => {
            let (r1, r2) = simulate_correlated_ou(m, grid, rng);
            for &c in curves {
                let v = match c {
                    CurveId::Zero => zero_curve(&m.factor1, grid, &r1),
                    CurveId::Delta => grid
                        .points()
                        .iter()
                        .zip(r1.iter().zip(&r2))
                        .map(|(&t, (&x1, &x2))| {
                            let tau = maturity - t;
                            phi_fn(m, tau) - b_fn(m.factor1.kappa, tau) * x1 + b_fn(m.factor2.kappa, tau) * x2
                        })
                        .collect(),
                };
                out.insert(c, v);
            }
            vec![r1, r2]
        }
    };
    Ok(SimulatedSeries {
        grid: grid.clone(),
        curves: out,
        short_rates,
        params: *params,
        seed: None,
    })
}

fn zero_curve(p: &SingleCurveParams, grid: &TimeGrid, rates: &[f64]) -> Vec<f64> {
    grid.points()
        .iter()
        .zip(rates)
        .map(|(&t, &r)| {
            let tau = grid.maturity() - t;
            -a_fn(p, tau) - b_fn(p.kappa, tau) * r
        })
        .collect()
}

/// [`simulate_log_bonds`] driven by a fresh generator seeded with `seed`.
pub fn simulate_seeded(params: &ModelParams, curves: &[CurveId], grid: &TimeGrid, seed: u64) -> Result<SimulatedSeries> {
    let mut rng = rng_from_seed(seed);
    let mut s = simulate_log_bonds(params, curves, grid, &mut rng)?;
    s.seed = Some(seed);
    Ok(s)
}
