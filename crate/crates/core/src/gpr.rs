//! Finite-dimensional Gaussian machinery: prior assembly, the log
//! marginal likelihood and posterior prediction.
//!
//! Observations are indexed by [`ObsLabel`] (a time plus a curve). When
//! both curves are present the layout is block-wise: every zero-coupon
//! point first, then every tenor-δ point, each block in time order.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::affine::{cov_loaded, mean_fn, CurveId, LoadedPoint, ModelParams, SeparableKernel};
use crate::error::{domain, Result};
use crate::linalg::{factorize, Factorization, JitterPolicy};
use crate::scalar::{Dual, Real};
use crate::simulator::{SimulatedSeries, TimeGrid};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsLabel {
    pub t: f64,
    pub curve: CurveId,
}

impl ObsLabel {
    pub fn new(t: f64, curve: CurveId) -> Self {
        ObsLabel { t, curve }
    }
}

/// Observed log-bond prices on a shared time grid, one vector per curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub grid: TimeGrid,
    pub values: BTreeMap<CurveId, Vec<f64>>,
    /// Variance of i.i.d. observation noise, added to the diagonal.
    pub noise_var: f64,
}

impl ObservationSet {
    pub fn new(grid: TimeGrid, values: BTreeMap<CurveId, Vec<f64>>, noise_var: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return domain(format!("noise variance must be finite and non-negative, got {noise_var}"));
        }
        if values.is_empty() {
            return domain("observation set needs at least one curve");
        }
        for (c, v) in &values {
            if v.len() != grid.len() {
                return domain(format!("curve {c} has {} values for {} grid points", v.len(), grid.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return domain(format!("curve {c} contains non-finite values"));
            }
        }
        Ok(ObservationSet {
            grid,
            values,
            noise_var,
        })
    }

    /// No observations at all; conditioning on it returns the prior.
    pub fn empty(maturity: f64, curves: &[CurveId]) -> Result<Self> {
        let values = curves.iter().map(|&c| (c, Vec::new())).collect();
        Self::new(TimeGrid::empty(maturity)?, values, 0.0)
    }

    pub fn from_series(series: &SimulatedSeries, noise_var: f64) -> Result<Self> {
        Self::new(series.grid.clone(), series.curves.clone(), noise_var)
    }

    pub fn maturity(&self) -> f64 {
        self.grid.maturity()
    }

    /// Number of time points (per curve).
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn curves(&self) -> Vec<CurveId> {
        self.values.keys().copied().collect()
    }

    /// Total number of scalar observations across curves.
    pub fn n_obs(&self) -> usize {
        self.len() * self.values.len()
    }

    pub fn labels(&self) -> Vec<ObsLabel> {
        self.values
            .keys()
            .flat_map(|&c| self.grid.points().iter().map(move |&t| ObsLabel::new(t, c)))
            .collect()
    }

    pub fn stacked_values(&self) -> Vec<f64> {
        self.values.values().flatten().copied().collect()
    }

    /// Observations at the given time indices (any order, no repeats).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) || idx.last().is_some_and(|&i| i >= self.len()) {
            return domain("subset indices must be distinct and in range");
        }
        let points = idx.iter().map(|&i| self.grid.points()[i]).collect();
        let grid = if idx.is_empty() {
            TimeGrid::empty(self.maturity())?
        } else {
            TimeGrid::new(points, self.maturity())?
        };
        let values = self
            .values
            .iter()
            .map(|(&c, v)| (c, idx.iter().map(|&i| v[i]).collect()))
            .collect();
        Self::new(grid, values, self.noise_var)
    }

    pub fn prefix(&self, n: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }

    /// Union of two observation sets on disjoint times with matching curves.
    pub fn merge(&self, other: &ObservationSet) -> Result<Self> {
        if self.curves() != other.curves() || self.maturity() != other.maturity() {
            return domain("cannot merge observation sets with different curves or maturity");
        }
        let mut rows: Vec<(f64, usize, usize)> = (0..self.len())
            .map(|i| (self.grid.points()[i], 0, i))
            .chain((0..other.len()).map(|i| (other.grid.points()[i], 1, i)))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let points: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let grid = TimeGrid::new(points, self.maturity())?;
        let values = self
            .values
            .keys()
            .map(|c| {
                let v = rows
                    .iter()
                    .map(|&(_, src, i)| if src == 0 { self.values[c][i] } else { other.values[c][i] })
                    .collect();
                (*c, v)
            })
            .collect();
        Self::new(grid, values, self.noise_var)
    }
}

/// A finite-dimensional Gaussian over labelled log-bond prices.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub labels: Vec<ObsLabel>,
}

impl GaussianBelief {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.cov.diagonal().iter().copied().collect()
    }
}

/// Ordered prediction targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRequest {
    pub targets: Vec<ObsLabel>,
}

impl PredictionRequest {
    pub fn new(targets: Vec<ObsLabel>) -> Result<Self> {
        if targets.is_empty() {
            return domain("prediction request has no targets");
        }
        Ok(PredictionRequest { targets })
    }

    /// Every time in `times` on every curve in `curves`, block-wise.
    pub fn grid(times: &[f64], curves: &[CurveId]) -> Result<Self> {
        Self::new(
            curves
                .iter()
                .flat_map(|&c| times.iter().map(move |&t| ObsLabel::new(t, c)))
                .collect(),
        )
    }
}

/// Mean vector and packed lower-triangular covariance (`i >= j`,
/// offset `i(i+1)/2 + j`) of the prior at `labels`.
pub(crate) fn prior_moments<F: Real>(params: &ModelParams<F>, labels: &[ObsLabel], maturity: f64) -> (Vec<F>, Vec<F>) {
    let loaded: Vec<LoadedPoint<F>> = labels
        .iter()
        .map(|l| LoadedPoint::new(params, l.curve, l.t, maturity))
        .collect();
    let mean = labels.iter().map(|l| mean_fn(params, l.curve, l.t, maturity)).collect();
    let n = labels.len();
    let mut cov = Vec::with_capacity(n * (n + 1) / 2);
    match SeparableKernel::new(params, &loaded) {
        Some(kernel) => {
            for i in 0..n {
                for j in 0..=i {
                    cov.push(kernel.cov(i, j));
                }
            }
        }
        None => {
            for i in 0..n {
                for j in 0..=i {
                    cov.push(cov_loaded(params, &loaded[i], &loaded[j]));
                }
            }
        }
    }
    (mean, cov)
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (a, b) = if i >= j { (i, j) } else { (j, i) };
    a * (a + 1) / 2 + b
}

fn unpack<F: Real>(cov: &[F], n: usize, noise_var: f64) -> DMatrix<f64> {
    let mut k = DMatrix::from_fn(n, n, |i, j| cov[packed(i, j)].value());
    for i in 0..n {
        k[(i, i)] += noise_var;
    }
    k
}

fn check_labels(params: &ModelParams, labels: &[ObsLabel], maturity: f64) -> Result<()> {
    params.validate()?;
    if !(maturity.is_finite() && maturity > 0.0) {
        return domain(format!("maturity must be positive, got {maturity}"));
    }
    for l in labels {
        if !(l.t.is_finite() && (0.0..=maturity).contains(&l.t)) {
            return domain(format!("time {} outside [0, {maturity}]", l.t));
        }
        if l.curve == CurveId::Delta && matches!(params, ModelParams::Single(_)) {
            return domain("the tenor-delta curve needs multi-curve parameters");
        }
    }
    Ok(())
}

/// Prior mean and covariance at `labels`, with `noise_var` on the diagonal.
pub fn assemble_prior(params: &ModelParams, labels: &[ObsLabel], maturity: f64, noise_var: f64) -> Result<GaussianBelief> {
    check_labels(params, labels, maturity)?;
    if !(noise_var.is_finite() && noise_var >= 0.0) {
        return domain("noise variance must be finite and non-negative");
    }
    let (mean, cov) = prior_moments(params, labels, maturity);
    Ok(GaussianBelief {
        mean: DVector::from_vec(mean),
        cov: unpack(&cov, labels.len(), noise_var),
        labels: labels.to_vec(),
    })
}

/// Log marginal likelihood plus factorization diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodEval {
    pub value: f64,
    /// Gradient with respect to the seeded inputs, when requested.
    pub gradient: Vec<f64>,
    pub jitter: f64,
}

fn lml_from_factor(fac: &Factorization, resid: &DVector<f64>) -> (f64, DVector<f64>) {
    let alpha = fac.solve(resid);
    let n = resid.len() as f64;
    let value = -0.5 * resid.dot(&alpha) - 0.5 * fac.log_det() - 0.5 * n * LN_2PI;
    (value, alpha)
}

fn check_obs(params: &ModelParams, labels: &[ObsLabel], y: &[f64], maturity: f64, noise_var: f64) -> Result<()> {
    check_labels(params, labels, maturity)?;
    if labels.len() != y.len() {
        return domain("label and value counts differ");
    }
    if !(noise_var.is_finite() && noise_var >= 0.0) {
        return domain("noise variance must be finite and non-negative");
    }
    Ok(())
}

/// `log p(y)` for observations at arbitrary labels (any order).
pub fn log_marginal_likelihood_at(
    params: &ModelParams,
    labels: &[ObsLabel],
    y: &[f64],
    maturity: f64,
    noise_var: f64,
    policy: &JitterPolicy,
) -> Result<LikelihoodEval> {
    check_obs(params, labels, y, maturity, noise_var)?;
    if labels.is_empty() {
        return Ok(LikelihoodEval {
            value: 0.0,
            gradient: Vec::new(),
            jitter: 0.0,
        });
    }
    let (mean, cov) = prior_moments(params, labels, maturity);
    let k = unpack(&cov, labels.len(), noise_var);
    let fac = factorize(&k, policy)?;
    let resid = DVector::from_iterator(y.len(), y.iter().zip(&mean).map(|(a, b)| a - b));
    let (value, _) = lml_from_factor(&fac, &resid);
    Ok(LikelihoodEval {
        value,
        gradient: Vec::new(),
        jitter: fac.jitter,
    })
}

/// Full Gaussian log density of the observations, constant included.
pub fn log_marginal_likelihood(params: &ModelParams, obs: &ObservationSet) -> Result<f64> {
    log_marginal_likelihood_with(params, obs, &JitterPolicy::default()).map(|e| e.value)
}

pub fn log_marginal_likelihood_with(params: &ModelParams, obs: &ObservationSet, policy: &JitterPolicy) -> Result<LikelihoodEval> {
    log_marginal_likelihood_at(params, &obs.labels(), &obs.stacked_values(), obs.maturity(), obs.noise_var, policy)
}

/// Value and gradient of `log p(y)` where `params` carries dual numbers
/// seeded on whichever inputs the caller differentiates against.
pub(crate) fn lml_dual<const N: usize>(
    params: &ModelParams<Dual<N>>,
    labels: &[ObsLabel],
    y: &[f64],
    maturity: f64,
    noise_var: f64,
    policy: &JitterPolicy,
) -> Result<LikelihoodEval> {
    let n = labels.len();
    if n == 0 {
        return Ok(LikelihoodEval {
            value: 0.0,
            gradient: vec![0.0; N],
            jitter: 0.0,
        });
    }
    let (mean, cov) = prior_moments(params, labels, maturity);
    let k = unpack(&cov, n, noise_var);
    let fac = factorize(&k, policy)?;
    let resid = DVector::from_iterator(n, y.iter().zip(&mean).map(|(a, b)| a - b.re));
    let (value, alpha) = lml_from_factor(&fac, &resid);
    let kinv = fac.inverse();

    // d log p = αᵀ dμ + ½ Σᵢⱼ (αᵢαⱼ - K⁻¹ᵢⱼ) dKᵢⱼ
    let mut grad = [0.0; N];
    for (a, m) in alpha.iter().zip(&mean) {
        for (g, d) in grad.iter_mut().zip(m.eps) {
            *g += a * d;
        }
    }
    let mut trace_w = 0.0;
    let mut diag_dk = [0.0; N];
    for i in 0..n {
        for j in 0..=i {
            let w = alpha[i] * alpha[j] - kinv[(i, j)];
            let dk = &cov[packed(i, j)].eps;
            let weight = if i == j { 0.5 * w } else { w };
            for (g, d) in grad.iter_mut().zip(dk) {
                *g += weight * d;
            }
            if i == j {
                trace_w += w;
                for (s, d) in diag_dk.iter_mut().zip(dk) {
                    *s += d;
                }
            }
        }
    }
    if fac.jitter > 0.0 {
        // jitter = level · mean(diag K) moves with the parameters
        for (g, s) in grad.iter_mut().zip(diag_dk) {
            *g += 0.5 * trace_w * fac.jitter_level * s / n as f64;
        }
    }
    Ok(LikelihoodEval {
        value,
        gradient: grad.to_vec(),
        jitter: fac.jitter,
    })
}

/// Log marginal likelihood and its gradient with respect to the model
/// parameters, in [`crate::ModelKind::param_names`] order.
pub fn log_marginal_likelihood_grad(params: &ModelParams, obs: &ObservationSet) -> Result<LikelihoodEval> {
    check_obs(params, &obs.labels(), &obs.stacked_values(), obs.maturity(), obs.noise_var)?;
    let labels = obs.labels();
    let y = obs.stacked_values();
    let policy = JitterPolicy::default();
    let v = params.to_vec();
    match params {
        ModelParams::Single(_) => {
            let d = seeded::<4>(&v);
            let p = ModelParams::Single(crate::affine::factor_from(&d));
            lml_dual(&p, &labels, &y, obs.maturity(), obs.noise_var, &policy)
        }
        ModelParams::Multi(m) => {
            let d = seeded::<8>(&v);
            let p = ModelParams::Multi(crate::affine::MultiCurveParams {
                factor1: crate::affine::factor_from(&d[..4]),
                factor2: crate::affine::factor_from(&d[4..]),
                rho: m.rho,
            });
            lml_dual(&p, &labels, &y, obs.maturity(), obs.noise_var, &policy)
        }
    }
}

fn seeded<const N: usize>(v: &[f64]) -> Vec<Dual<N>> {
    v.iter().enumerate().map(|(i, &x)| Dual::variable(x, i)).collect()
}

/// Conditions the prior at `req` on `obs`.
pub fn posterior(params: &ModelParams, obs: &ObservationSet, req: &PredictionRequest) -> Result<GaussianBelief> {
    posterior_with(params, obs, req, &JitterPolicy::default())
}

pub fn posterior_with(
    params: &ModelParams,
    obs: &ObservationSet,
    req: &PredictionRequest,
    policy: &JitterPolicy,
) -> Result<GaussianBelief> {
    let maturity = obs.maturity();
    check_labels(params, &req.targets, maturity)?;
    let obs_labels = obs.labels();
    check_labels(params, &obs_labels, maturity)?;
    let n = obs_labels.len();
    let m = req.targets.len();
    let mut all = obs_labels;
    all.extend_from_slice(&req.targets);
    let (mean, cov) = prior_moments(params, &all, maturity);

    let mu_t = DVector::from_iterator(m, mean[n..].iter().copied());
    let k_tt = DMatrix::from_fn(m, m, |i, j| cov[packed(n + i, n + j)]);
    if n == 0 {
        return Ok(GaussianBelief {
            mean: mu_t,
            cov: k_tt,
            labels: req.targets.clone(),
        });
    }
    let k_yy = unpack(&cov[..n * (n + 1) / 2], n, obs.noise_var);
    let k_yt = DMatrix::from_fn(n, m, |i, j| cov[packed(i, n + j)]);
    let fac = factorize(&k_yy, policy)?;
    let y = obs.stacked_values();
    let resid = DVector::from_iterator(n, y.iter().zip(&mean[..n]).map(|(a, b)| a - b));
    let alpha = fac.solve(&resid);
    let post_mean = mu_t + k_yt.transpose() * alpha;
    let v = fac.solve_lower(&k_yt);
    let mut post_cov = k_tt - v.transpose() * v;
    // symmetrize
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (post_cov[(i, j)] + post_cov[(j, i)]);
            post_cov[(i, j)] = s;
            post_cov[(j, i)] = s;
        }
    }
    Ok(GaussianBelief {
        mean: post_mean,
        cov: post_cov,
        labels: req.targets.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub t: f64,
    pub curve: CurveId,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided standard normal quantile for a central `level` interval.
pub fn z_score(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("confidence level must lie in (0, 1), got {level}"));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(0.5 + 0.5 * level))
}

/// Pointwise `mean ± z·sd` bands; tiny negative variances from rounding
/// are treated as zero.
pub fn confidence_band(belief: &GaussianBelief, level: f64) -> Result<Vec<ConfidenceInterval>> {
    let z = z_score(level)?;
    Ok(belief
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mean = belief.mean[i];
            let half = z * belief.cov[(i, i)].max(0.0).sqrt();
            ConfidenceInterval {
                t: l.t,
                curve: l.curve,
                mean,
                lower: mean - half,
                upper: mean + half,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{affine_a, affine_b, cov_log_bond, MultiCurveParams, SingleCurveParams};
    use crate::simulator::simulate_seeded;

    fn single() -> ModelParams {
        SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap().into()
    }

    fn sim_obs(n: usize, seed: u64) -> ObservationSet {
        let g = TimeGrid::uniform(n, 1.0 / n as f64, 1.0 + 1.0 / n as f64).unwrap();
        let s = simulate_seeded(&single(), &[CurveId::Zero], &g, seed).unwrap();
        ObservationSet::from_series(&s, 0.0).unwrap()
    }

    #[test]
    fn prior_at_origin_is_deterministic() {
        let b = assemble_prior(&single(), &[ObsLabel::new(0.0, CurveId::Zero)], 1.0, 0.0).unwrap();
        assert_eq!(b.cov[(0, 0)], 0.0);
        let p = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap();
        let expect = -affine_a(&p, 1.0).unwrap() - affine_b(2.0, 1.0).unwrap() * 0.5;
        assert!((b.mean[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn gram_matrix_is_pairwise_covariance() {
        let labels: Vec<_> = [0.1, 0.4, 0.75].iter().map(|&t| ObsLabel::new(t, CurveId::Zero)).collect();
        let b = assemble_prior(&single(), &labels, 1.0, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let c = cov_log_bond(&single(), CurveId::Zero, CurveId::Zero, labels[i].t, labels[j].t, 1.0).unwrap();
                assert!((b.cov[(i, j)] - c).abs() <= 1e-15 * c.abs(), "{} vs {c}", b.cov[(i, j)]);
            }
        }
    }

    #[test]
    fn noise_only_on_diagonal() {
        let labels: Vec<_> = [0.2, 0.5].iter().map(|&t| ObsLabel::new(t, CurveId::Zero)).collect();
        let a = assemble_prior(&single(), &labels, 1.0, 0.0).unwrap();
        let b = assemble_prior(&single(), &labels, 1.0, 0.01).unwrap();
        assert_eq!(b.cov[(0, 1)], a.cov[(0, 1)]);
        assert!((b.cov[(1, 1)] - a.cov[(1, 1)] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn one_point_at_the_mean() {
        let l = [ObsLabel::new(0.5, CurveId::Zero)];
        let prior = assemble_prior(&single(), &l, 1.0, 0.0).unwrap();
        let v = prior.cov[(0, 0)];
        let e = log_marginal_likelihood_at(&single(), &l, &[prior.mean[0]], 1.0, 0.0, &JitterPolicy::default()).unwrap();
        assert!((e.value + 0.5 * (2.0 * std::f64::consts::PI * v).ln()).abs() < 1e-12);
    }

    #[test]
    fn multi_cross_block_without_factor_two() {
        let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap();
        let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.0).unwrap();
        let p: ModelParams = MultiCurveParams::new(f1, f2, 0.0).unwrap().into();
        let times = [0.2, 0.5, 0.8];
        let req = PredictionRequest::grid(&times, &[CurveId::Zero, CurveId::Delta]).unwrap();
        let b = assemble_prior(&p, &req.targets, 1.0, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = affine_b(2.0, 1.0 - times[i]).unwrap()
                    * affine_b(2.0, 1.0 - times[j]).unwrap()
                    * crate::affine::short_rate_cov(&f1, times[i], times[j]);
                assert!((b.cov[(i, 3 + j)] - expect).abs() <= 1e-15 * expect.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn empty_observations_return_prior() {
        let obs = ObservationSet::empty(1.0, &[CurveId::Zero]).unwrap();
        let req = PredictionRequest::grid(&[0.3, 0.6], &[CurveId::Zero]).unwrap();
        let post = posterior(&single(), &obs, &req).unwrap();
        let prior = assemble_prior(&single(), &req.targets, 1.0, 0.0).unwrap();
        assert_eq!(post, prior);
    }

    #[test]
    fn conditioning_on_itself_interpolates() {
        let obs = sim_obs(30, 9);
        let req = PredictionRequest::new(obs.labels()).unwrap();
        let post = posterior(&single(), &obs, &req).unwrap();
        let prior = assemble_prior(&single(), &req.targets, obs.maturity(), 0.0).unwrap();
        for (i, y) in obs.stacked_values().iter().enumerate() {
            assert!((post.mean[i] - y).abs() <= 1e-8 * y.abs());
            assert!(post.cov[(i, i)] <= 1e-8 * (prior.cov[(i, i)] + 1e-30));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let obs = sim_obs(10, 4);
        let p = single();
        let e = log_marginal_likelihood_grad(&p, &obs).unwrap();
        let v = p.to_vec();
        for i in 0..4 {
            let h = 1e-6 * v[i].abs().max(1.0);
            let mut up = v.clone();
            let mut dn = v.clone();
            up[i] += h;
            dn[i] -= h;
            let fu = log_marginal_likelihood(&ModelParams::from_slice(p.kind(), &up, 0.0).unwrap(), &obs).unwrap();
            let fd = log_marginal_likelihood(&ModelParams::from_slice(p.kind(), &dn, 0.0).unwrap(), &obs).unwrap();
            let num = (fu - fd) / (2.0 * h);
            assert!((num - e.gradient[i]).abs() <= 1e-4 * num.abs().max(1.0), "param {i}: {num} vs {}", e.gradient[i]);
        }
    }

    #[test]
    fn band_edges() {
        let b = GaussianBelief {
            mean: DVector::from_vec(vec![0.0, 3.0]),
            cov: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            labels: vec![ObsLabel::new(0.1, CurveId::Zero), ObsLabel::new(0.2, CurveId::Zero)],
        };
        let band = confidence_band(&b, 0.95).unwrap();
        assert!((band[0].upper - 1.959964).abs() < 1e-5);
        assert!((band[0].lower + 1.959964).abs() < 1e-5);
        assert_eq!((band[1].lower, band[1].upper), (3.0, 3.0));
        let wide = confidence_band(&b, 0.99).unwrap();
        assert!(wide[0].lower <= band[0].lower && wide[0].upper >= band[0].upper);
        assert!(confidence_band(&b, 1.0).is_err());
        assert!(confidence_band(&b, 0.0).is_err());
    }

    #[test]
    fn subset_and_merge_round_trip() {
        let obs = sim_obs(10, 1);
        let a = obs.subset(&[0, 2, 4, 6, 8]).unwrap();
        let b = obs.subset(&[9, 7, 5, 3, 1]).unwrap();
        assert_eq!(a.merge(&b).unwrap(), obs);
        assert!(obs.subset(&[1, 1]).is_err());
        assert!(obs.subset(&[10]).is_err());
    }
}
