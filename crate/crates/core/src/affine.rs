//! Closed-form affine term-structure machinery for the one- and
//! two-factor Vasiček models.
//!
//! The zero-coupon curve is driven by the first factor only:
//! `log P(t,T,0) = -A(T-t) - B(T-t) r¹_t`. The tenor-δ curve loads on
//! both factors: `log P(t,T,δ) = Φ(T-t) + Ψ₁(T-t) r¹_t + Ψ₂(T-t) r²_t`.
//! Since the factors are Gaussian, log-bond prices on either curve form
//! a Gaussian process whose mean and covariance are available in closed
//! form. Those functions are the building blocks of the GP prior.
//!
//! The `*_fn` helpers are generic over [`Real`] so the same formulas
//! yield exact gradients when evaluated on dual numbers.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Parameters of one Ornstein–Uhlenbeck short-rate factor
/// `dr = κ(θ - r)dt + σ dW`, `r(0) = r₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCurveParams<F = f64> {
    pub r0: F,
    pub kappa: F,
    pub theta: F,
    pub sigma: F,
}

/// Two correlated OU factors. `rho` is a fixed model input and is never
/// calibrated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiCurveParams<F = f64> {
    pub factor1: SingleCurveParams<F>,
    pub factor2: SingleCurveParams<F>,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams<F = f64> {
    Single(SingleCurveParams<F>),
    Multi(MultiCurveParams<F>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Single,
    Multi,
}

/// Curve label: zero-coupon bonds `P(t,T,0)` or tenor-δ bonds `P(t,T,δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveId {
    Zero,
    Delta,
}

impl CurveId {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveId::Zero => "zero",
            CurveId::Delta => "delta",
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CurveId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(CurveId::Zero),
            "delta" | "d" => Ok(CurveId::Delta),
            other => domain(format!("unknown curve '{other}'")),
        }
    }
}

impl ModelKind {
    pub fn n_params(self) -> usize {
        match self {
            ModelKind::Single => 4,
            ModelKind::Multi => 8,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Single => &["r0", "kappa", "theta", "sigma"],
            ModelKind::Multi => &[
                "r0_1", "kappa_1", "theta_1", "sigma_1", "r0_2", "kappa_2", "theta_2", "sigma_2",
            ],
        }
    }

    pub fn curves(self) -> &'static [CurveId] {
        match self {
            ModelKind::Single => &[CurveId::Zero],
            ModelKind::Multi => &[CurveId::Zero, CurveId::Delta],
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" => Ok(ModelKind::Single),
            "multi" => Ok(ModelKind::Multi),
            other => domain(format!("unknown model kind '{other}'")),
        }
    }
}

impl SingleCurveParams<f64> {
    pub fn new(r0: f64, kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        let p = SingleCurveParams {
            r0,
            kappa,
            theta,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    /// `sigma == 0` is accepted as the deterministic limit of the model.
    pub fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.theta.is_finite()) {
            return domain("r0 and theta must be finite");
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return domain(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return domain(format!("sigma must be non-negative, got {}", self.sigma));
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.r0, self.kappa, self.theta, self.sigma]
    }
}

impl MultiCurveParams<f64> {
    pub fn new(factor1: SingleCurveParams, factor2: SingleCurveParams, rho: f64) -> Result<Self> {
        let p = MultiCurveParams {
            factor1,
            factor2,
            rho,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.factor1.validate()?;
        self.factor2.validate()?;
        if !(-1.0..=1.0).contains(&self.rho) {
            return domain(format!("rho must lie in [-1, 1], got {}", self.rho));
        }
        Ok(())
    }
}

impl<F: Copy> ModelParams<F> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Single(_) => ModelKind::Single,
            ModelParams::Multi(_) => ModelKind::Multi,
        }
    }

    /// Parameters driving the zero-coupon curve.
    pub fn factor1(&self) -> &SingleCurveParams<F> {
        match self {
            ModelParams::Single(p) => p,
            ModelParams::Multi(m) => &m.factor1,
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            ModelParams::Single(_) => 0.0,
            ModelParams::Multi(m) => m.rho,
        }
    }
}

impl ModelParams<f64> {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Single(p) => p.validate(),
            ModelParams::Multi(m) => m.validate(),
        }
    }

    /// Flat parameter vector in [`ModelKind::param_names`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            ModelParams::Single(p) => p.to_vec(),
            ModelParams::Multi(m) => {
                let mut v = m.factor1.to_vec();
                v.extend(m.factor2.to_vec());
                v
            }
        }
    }

    /// Inverse of [`ModelParams::to_vec`]; `rho` is ignored for single-curve models.
    pub fn from_slice(kind: ModelKind, values: &[f64], rho: f64) -> Result<Self> {
        if values.len() != kind.n_params() {
            return domain(format!(
                "{kind:?} model takes {} parameters, got {}",
                kind.n_params(),
                values.len()
            ));
        }
        let p = match kind {
            ModelKind::Single => ModelParams::Single(factor_from(values)),
            ModelKind::Multi => ModelParams::Multi(MultiCurveParams {
                factor1: factor_from(&values[..4]),
                factor2: factor_from(&values[4..]),
                rho,
            }),
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<SingleCurveParams> for ModelParams {
    fn from(p: SingleCurveParams) -> Self {
        ModelParams::Single(p)
    }
}

impl From<MultiCurveParams> for ModelParams {
    fn from(p: MultiCurveParams) -> Self {
        ModelParams::Multi(p)
    }
}

pub(crate) fn factor_from<F: Copy>(v: &[F]) -> SingleCurveParams<F> {
    SingleCurveParams {
        r0: v[0],
        kappa: v[1],
        theta: v[2],
        sigma: v[3],
    }
}

// ---------------------------------------------------------------------
// Generic closed forms. No validation; callers check domains.

/// `B(τ) = (1 - e^{-κτ}) / κ`.
#[inline]
pub(crate) fn b_fn<F: Real>(kappa: F, tau: f64) -> F {
    -(kappa.scale(-tau)).exp_m1() / kappa
}

#[inline]
pub(crate) fn a_fn<F: Real>(p: &SingleCurveParams<F>, tau: f64) -> F {
    let x = p.kappa.scale(tau);
    let e1 = (-x).exp_m1();
    let e2 = x.scale(-2.0).exp_m1();
    let drift = p.theta / p.kappa * (e1 + x);
    let k3 = p.kappa * p.kappa * p.kappa;
    let convexity = p.sigma * p.sigma / k3.scale(4.0) * (e2 - e1.scale(4.0) - x.scale(2.0));
    drift + convexity
}

/// Variance contribution of one factor to `Φ`: `½ Var(∫₀^τ r du)`.
#[inline]
fn integrated_variance_half<F: Real>(p: &SingleCurveParams<F>, tau: f64) -> F {
    let x = p.kappa.scale(tau);
    let bracket = F::cst(tau) + (x.scale(-1.0).exp_m1().scale(2.0) - x.scale(-2.0).exp_m1().scale(0.5)) / p.kappa;
    p.sigma * p.sigma / (p.kappa * p.kappa).scale(2.0) * bracket
}

#[inline]
pub(crate) fn phi_fn<F: Real>(p: &MultiCurveParams<F>, tau: f64) -> F {
    let (f1, f2) = (&p.factor1, &p.factor2);
    let e1 = f1.kappa.scale(-tau).exp_m1();
    let e2 = f2.kappa.scale(-tau).exp_m1();
    let ksum = f1.kappa + f2.kappa;
    let e12 = ksum.scale(-tau).exp_m1();

    let drift = -(f1.theta - f2.theta).scale(tau) - f1.theta / f1.kappa * e1 + f2.theta / f2.kappa * e2;
    let cross = (f1.sigma * f2.sigma).scale(p.rho) / (f1.kappa * f2.kappa)
        * (F::cst(tau) + e1 / f1.kappa + e2 / f2.kappa - e12 / ksum);
    drift + integrated_variance_half(f1, tau) + integrated_variance_half(f2, tau) - cross
}

/// `E[r_t] = θ + (r₀ - θ) e^{-κt}`.
#[inline]
pub(crate) fn factor_mean_fn<F: Real>(p: &SingleCurveParams<F>, t: f64) -> F {
    p.theta + (p.r0 - p.theta) * p.kappa.scale(-t).exp()
}

/// `Cov(r_s, r_t) = σ²/(2κ) e^{-κ(s+t)} (e^{2κ(s∧t)} - 1)`, evaluated
/// in the equivalent form `σ²/(2κ) e^{-κ|s-t|} (1 - e^{-2κ(s∧t)})`.
#[inline]
pub(crate) fn ou_cov_fn<F: Real>(p: &SingleCurveParams<F>, s: f64, t: f64) -> F {
    let m = s.min(t);
    let lag = (s - t).abs();
    p.sigma * p.sigma / p.kappa.scale(2.0) * p.kappa.scale(-lag).exp() * -(p.kappa.scale(-2.0 * m)).exp_m1()
}

/// `Cov(r¹_s, r²_t) = ρσ₁σ₂/(κ₁+κ₂) e^{-(κ₁s+κ₂t)} (e^{(κ₁+κ₂)(s∧t)} - 1)`.
#[inline]
pub(crate) fn cross_cov_fn<F: Real>(p: &MultiCurveParams<F>, s: f64, t: f64) -> F {
    let (f1, f2) = (&p.factor1, &p.factor2);
    let m = s.min(t);
    let ksum = f1.kappa + f2.kappa;
    let decay = (f1.kappa.scale(s - m) + f2.kappa.scale(t - m)).scale(-1.0).exp();
    (f1.sigma * f2.sigma).scale(p.rho) / ksum * decay * -(ksum.scale(-m)).exp_m1()
}

/// Factor loadings `(Ψ₁, Ψ₂)` of a log-bond on `(r¹, r²)` at time to maturity `tau`.
#[inline]
pub(crate) fn loadings_fn<F: Real>(params: &ModelParams<F>, curve: CurveId, tau: f64) -> (F, F) {
    match (params, curve) {
        (ModelParams::Single(p), _) => (-b_fn(p.kappa, tau), F::cst(0.0)),
        (ModelParams::Multi(m), CurveId::Zero) => (-b_fn(m.factor1.kappa, tau), F::cst(0.0)),
        (ModelParams::Multi(m), CurveId::Delta) => {
            (-b_fn(m.factor1.kappa, tau), b_fn(m.factor2.kappa, tau))
        }
    }
}

#[inline]
pub(crate) fn mean_fn<F: Real>(params: &ModelParams<F>, curve: CurveId, t: f64, maturity: f64) -> F {
    let tau = maturity - t;
    match (params, curve) {
        (ModelParams::Single(p), _) => -a_fn(p, tau) - b_fn(p.kappa, tau) * factor_mean_fn(p, t),
        (ModelParams::Multi(m), CurveId::Zero) => {
            let p = &m.factor1;
            -a_fn(p, tau) - b_fn(p.kappa, tau) * factor_mean_fn(p, t)
        }
        (ModelParams::Multi(m), CurveId::Delta) => {
            phi_fn(m, tau) - b_fn(m.factor1.kappa, tau) * factor_mean_fn(&m.factor1, t)
                + b_fn(m.factor2.kappa, tau) * factor_mean_fn(&m.factor2, t)
        }
    }
}

/// One observation point with its precomputed factor loadings.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LoadedPoint<F> {
    pub t: f64,
    pub l1: F,
    pub l2: F,
}

impl<F: Real> LoadedPoint<F> {
    pub fn new(params: &ModelParams<F>, curve: CurveId, t: f64, maturity: f64) -> Self {
        let (l1, l2) = loadings_fn(params, curve, maturity - t);
        LoadedPoint { t, l1, l2 }
    }
}

/// Covariance between two loaded points. The summation order makes the
/// result bitwise symmetric under swapping `a` and `b`.
#[inline]
pub(crate) fn cov_loaded<F: Real>(params: &ModelParams<F>, a: &LoadedPoint<F>, b: &LoadedPoint<F>) -> F {
    match params {
        ModelParams::Single(p) => (a.l1 * b.l1) * ou_cov_fn(p, a.t, b.t),
        ModelParams::Multi(m) => {
            let t11 = (a.l1 * b.l1) * ou_cov_fn(&m.factor1, a.t, b.t);
            let t22 = (a.l2 * b.l2) * ou_cov_fn(&m.factor2, a.t, b.t);
            if m.rho == 0.0 {
                return t11 + t22;
            }
            let t12 = (a.l1 * b.l2) * cross_cov_fn(m, a.t, b.t);
            let t21 = (a.l2 * b.l1) * cross_cov_fn(m, b.t, a.t);
            t11 + (t12 + t21) + t22
        }
    }
}

/// Above this `κ·t` the factored kernel below could overflow.
const SEPARABLE_MAX_EXPONENT: f64 = 300.0;

/// Per-point factors of one OU kernel: for `s ≤ t`,
/// `Cov(r_s, r_t) = c · g(s) · h(t)` with `g(s) = e^{κs}(1 - e^{-2κs})`
/// and `h(t) = e^{-κt}`.
struct OuFactors<F> {
    c: F,
    g: Vec<F>,
    h: Vec<F>,
}

impl<F: Real> OuFactors<F> {
    fn new(p: &SingleCurveParams<F>, times: &[f64]) -> Self {
        OuFactors {
            c: p.sigma * p.sigma / p.kappa.scale(2.0),
            g: times
                .iter()
                .map(|&t| p.kappa.scale(t).exp() * -(p.kappa.scale(-2.0 * t)).exp_m1())
                .collect(),
            h: times.iter().map(|&t| p.kappa.scale(-t).exp()).collect(),
        }
    }
}

/// Cross-factor analogue: for `s ≤ t`, `Cov(r¹_s, r²_t) = c · p(s) · e₂(t)`,
/// otherwise `c · q(t) · e₁(s)`.
struct CrossFactors<F> {
    c: F,
    p: Vec<F>,
    q: Vec<F>,
    e1: Vec<F>,
    e2: Vec<F>,
}

/// The prior covariance at a fixed set of points, with every
/// exponential evaluated once per point instead of once per pair.
pub(crate) struct SeparableKernel<F> {
    times: Vec<f64>,
    l1: Vec<F>,
    l2: Vec<F>,
    f1: OuFactors<F>,
    f2: Option<OuFactors<F>>,
    cross: Option<CrossFactors<F>>,
}

impl<F: Real> SeparableKernel<F> {
    /// `None` when some `κ·t` is large enough to risk overflow.
    pub fn new(params: &ModelParams<F>, points: &[LoadedPoint<F>]) -> Option<Self> {
        let t_max = points.iter().map(|p| p.t).fold(0.0, f64::max);
        let fits = |p: &SingleCurveParams<F>| p.kappa.value() * t_max <= SEPARABLE_MAX_EXPONENT;
        let times: Vec<f64> = points.iter().map(|p| p.t).collect();
        let l1 = points.iter().map(|p| p.l1).collect();
        let l2 = points.iter().map(|p| p.l2).collect();
        match params {
            ModelParams::Single(p) => fits(p).then(|| SeparableKernel {
                f1: OuFactors::new(p, &times),
                f2: None,
                cross: None,
                times,
                l1,
                l2,
            }),
            ModelParams::Multi(m) => {
                if !(fits(&m.factor1) && fits(&m.factor2)) {
                    return None;
                }
                let (a, b) = (&m.factor1, &m.factor2);
                let cross = (m.rho != 0.0).then(|| {
                    let ksum = a.kappa + b.kappa;
                    let w: Vec<F> = times.iter().map(|&t| -(ksum.scale(-t)).exp_m1()).collect();
                    CrossFactors {
                        c: (a.sigma * b.sigma).scale(m.rho) / ksum,
                        p: times.iter().zip(&w).map(|(&t, &w)| b.kappa.scale(t).exp() * w).collect(),
                        q: times.iter().zip(&w).map(|(&t, &w)| a.kappa.scale(t).exp() * w).collect(),
                        e1: times.iter().map(|&t| a.kappa.scale(-t).exp()).collect(),
                        e2: times.iter().map(|&t| b.kappa.scale(-t).exp()).collect(),
                    }
                });
                Some(SeparableKernel {
                    f1: OuFactors::new(a, &times),
                    f2: Some(OuFactors::new(b, &times)),
                    cross,
                    times,
                    l1,
                    l2,
                })
            }
        }
    }

    #[inline]
    fn ou(f: &OuFactors<F>, times: &[f64], i: usize, j: usize) -> F {
        let (lo, hi) = if times[i] <= times[j] { (i, j) } else { (j, i) };
        f.c * f.g[lo] * f.h[hi]
    }

    /// `Cov(r¹ at point i, r² at point j)`.
    #[inline]
    fn cross12(c: &CrossFactors<F>, times: &[f64], i: usize, j: usize) -> F {
        if times[i] <= times[j] {
            c.c * c.p[i] * c.e2[j]
        } else {
            c.c * c.q[j] * c.e1[i]
        }
    }

    pub fn cov(&self, i: usize, j: usize) -> F {
        let t11 = (self.l1[i] * self.l1[j]) * Self::ou(&self.f1, &self.times, i, j);
        let Some(f2) = &self.f2 else { return t11 };
        let t22 = (self.l2[i] * self.l2[j]) * Self::ou(f2, &self.times, i, j);
        let Some(c) = &self.cross else { return t11 + t22 };
        let t12 = (self.l1[i] * self.l2[j]) * Self::cross12(c, &self.times, i, j);
        let t21 = (self.l2[i] * self.l1[j]) * Self::cross12(c, &self.times, j, i);
        t11 + (t12 + t21) + t22
    }
}

// ---------------------------------------------------------------------
// Validated f64 surface.

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return domain(format!("time to maturity must be non-negative, got {tau}"));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return domain(format!("kappa must be positive, got {kappa}"));
    }
    Ok(())
}

fn check_time(t: f64, maturity: f64) -> Result<()> {
    if !(maturity.is_finite() && maturity > 0.0) {
        return domain(format!("maturity must be positive, got {maturity}"));
    }
    if !(t.is_finite() && (0.0..=maturity).contains(&t)) {
        return domain(format!("time {t} outside [0, {maturity}]"));
    }
    Ok(())
}

fn check_curve(params: &ModelParams, curve: CurveId) -> Result<()> {
    if matches!((params, curve), (ModelParams::Single(_), CurveId::Delta)) {
        return domain("the tenor-delta curve needs multi-curve parameters");
    }
    Ok(())
}

/// `B(τ) = (1 - e^{-κτ}) / κ`, increasing in `τ` and bounded by `1/κ`.
pub fn affine_b(kappa: f64, tau: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_tau(tau)?;
    Ok(b_fn(kappa, tau))
}

pub fn affine_a(params: &SingleCurveParams, tau: f64) -> Result<f64> {
    check_kappa(params.kappa)?;
    check_tau(tau)?;
    Ok(a_fn(params, tau))
}

/// Loading of the tenor-δ bond on the first factor, `Ψ₁ = -B(κ₁, τ)`.
pub fn psi1(kappa1: f64, tau: f64) -> Result<f64> {
    affine_b(kappa1, tau).map(|b| -b)
}

/// Loading of the tenor-δ bond on the second factor, `Ψ₂ = B(κ₂, τ)`.
pub fn psi2(kappa2: f64, tau: f64) -> Result<f64> {
    affine_b(kappa2, tau)
}

pub fn phi(params: &MultiCurveParams, tau: f64) -> Result<f64> {
    check_kappa(params.factor1.kappa)?;
    check_kappa(params.factor2.kappa)?;
    check_tau(tau)?;
    Ok(phi_fn(params, tau))
}

/// Mean of the short-rate factor at time `t`.
pub fn short_rate_mean(params: &SingleCurveParams, t: f64) -> f64 {
    factor_mean_fn(params, t)
}

/// `Cov(r_s, r_t)` for one OU factor.
pub fn short_rate_cov(params: &SingleCurveParams, s: f64, t: f64) -> f64 {
    ou_cov_fn(params, s, t)
}

/// `Cov(r¹_s, r²_t)` between the two factors.
pub fn cross_rate_cov(params: &MultiCurveParams, s: f64, t: f64) -> f64 {
    cross_cov_fn(params, s, t)
}

/// Mixed second moment `E[r¹_s r²_t]`, expanded term by term from the
/// explicit solutions of both factors.
pub fn mixed_second_moment(params: &MultiCurveParams, s: f64, t: f64) -> f64 {
    let (f1, f2) = (&params.factor1, &params.factor2);
    let d1 = (-f1.kappa * s).exp();
    let d2 = (-f2.kappa * t).exp();
    let m = s.min(t);
    let ksum = f1.kappa + f2.kappa;
    f1.r0 * f2.r0 * d1 * d2
        + f1.r0 * f2.theta * d1 * (1.0 - d2)
        + f2.r0 * f1.theta * d2 * (1.0 - d1)
        + f1.theta * f2.theta * (1.0 - d1) * (1.0 - d2)
        + params.rho * f1.sigma * f2.sigma / ksum
            * (-(f1.kappa * s + f2.kappa * t)).exp()
            * ((ksum * m).exp() - 1.0)
}

/// Mean of the log-bond price `log P(t,T)` on `curve`.
pub fn mean_log_bond(params: &ModelParams, curve: CurveId, t: f64, maturity: f64) -> Result<f64> {
    params.validate()?;
    check_curve(params, curve)?;
    check_time(t, maturity)?;
    Ok(mean_fn(params, curve, t, maturity))
}

/// Covariance of `log P(s,T)` on `curve_a` with `log P(t,T)` on `curve_b`.
pub fn cov_log_bond(
    params: &ModelParams,
    curve_a: CurveId,
    curve_b: CurveId,
    s: f64,
    t: f64,
    maturity: f64,
) -> Result<f64> {
    params.validate()?;
    check_curve(params, curve_a)?;
    check_curve(params, curve_b)?;
    check_time(s, maturity)?;
    check_time(t, maturity)?;
    let a = LoadedPoint::new(params, curve_a, s, maturity);
    let b = LoadedPoint::new(params, curve_b, t, maturity);
    Ok(cov_loaded(params, &a, &b))
}
