//! Hyper-parameter search: minimize the negative log marginal likelihood
//! with Polak–Ribière conjugate gradient or Adam.
//!
//! Both optimizers work in an unconstrained space where the positive
//! parameters (every `kappa` and `sigma`) are represented by their
//! logarithms.

use std::cell::Cell;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{factor_from, ModelKind, ModelParams, MultiCurveParams};
use crate::error::{domain, Result};
use crate::gpr::{lml_dual, log_marginal_likelihood_at, ObsLabel, ObservationSet};
use crate::linalg::JitterPolicy;
use crate::scalar::{Dual, Real};

/// A differentiable objective over `R^dim`. Failed evaluations return
/// a non-finite value rather than an error.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }
}

/// Value returned when the covariance cannot be factorized.
pub const BARRIER: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Identity,
    Log,
}

/// Per-coordinate map between constrained parameters and optimizer space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamTransform {
    pub maps: Vec<Transform>,
}

impl ParamTransform {
    pub fn for_model(kind: ModelKind) -> Self {
        use Transform::{Identity as I, Log as L};
        let factor = [I, L, I, L];
        let maps = match kind {
            ModelKind::Single => factor.to_vec(),
            ModelKind::Multi => factor.iter().chain(&factor).copied().collect(),
        };
        ParamTransform { maps }
    }

    pub fn to_unconstrained(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.maps.len() {
            return domain("parameter vector has the wrong length");
        }
        self.maps
            .iter()
            .zip(p)
            .map(|(m, &x)| match m {
                Transform::Identity => Ok(x),
                Transform::Log if x > 0.0 => Ok(x.ln()),
                Transform::Log => domain(format!("log-transformed parameter must be positive, got {x}")),
            })
            .collect()
    }

    pub fn to_constrained(&self, u: &[f64]) -> Vec<f64> {
        self.maps.iter().zip(u).map(|(m, &x)| self.apply(*m, x)).collect()
    }

    fn apply<F: Real>(&self, m: Transform, x: F) -> F {
        match m {
            Transform::Identity => x,
            Transform::Log => x.exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cg,
    Adam,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cg" => Ok(Method::Cg),
            "adam" => Ok(Method::Adam),
            other => domain(format!("unknown optimizer '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Forward-mode derivatives of the closed-form likelihood.
    Analytic,
    /// Central differences with step `1e-6 · max(1, |x|)`.
    FiniteDifference,
}

/// Uniform initialization intervals in constrained space, shared by
/// both factors of a multi-curve model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRanges {
    pub r0: (f64, f64),
    pub kappa: (f64, f64),
    pub theta: (f64, f64),
    pub sigma: (f64, f64),
}

impl Default for InitRanges {
    fn default() -> Self {
        InitRanges {
            r0: (0.0, 1.0),
            kappa: (0.1, 5.0),
            theta: (0.0, 0.5),
            sigma: (0.05, 1.0),
        }
    }
}

impl InitRanges {
    /// Fixed point `p` for every parameter.
    pub fn point(p: &crate::SingleCurveParams) -> Self {
        InitRanges {
            r0: (p.r0, p.r0),
            kappa: (p.kappa, p.kappa),
            theta: (p.theta, p.theta),
            sigma: (p.sigma, p.sigma),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, (a, b)) in [("r0", self.r0), ("kappa", self.kappa), ("theta", self.theta), ("sigma", self.sigma)] {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return domain(format!("invalid init range for {name}: [{a}, {b}]"));
            }
        }
        if self.kappa.0 <= 0.0 || self.sigma.0 <= 0.0 {
            return domain("kappa and sigma init ranges must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub max_line_search_evals: usize,
    pub gradient: GradientMethod,
    pub init_ranges: InitRanges,
    pub seed: u64,
    pub trace: bool,
    pub jitter: JitterPolicy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Cg,
            max_iters: 1000,
            grad_tol: 1e-5,
            learning_rate: 0.05,
            epochs: 700,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.1,
            max_line_search_evals: 25,
            gradient: GradientMethod::Analytic,
            init_ranges: InitRanges::default(),
            seed: 0,
            trace: false,
            jitter: JitterPolicy::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn adam(epochs: usize) -> Self {
        OptimizerConfig {
            method: Method::Adam,
            epochs,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return domain("Wolfe constants must satisfy 0 < c1 < c2 < 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return domain("learning rate must be positive");
        }
        if self.epochs == 0 {
            return domain("epochs must be at least 1");
        }
        if self.max_line_search_evals == 0 {
            return domain("line search needs at least one evaluation");
        }
        if !(self.grad_tol >= 0.0) {
            return domain("gradient tolerance must be non-negative");
        }
        self.init_ranges.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub nll: f64,
    pub grad_norm: f64,
}

/// Outcome of a run of either optimizer on a generic [`Objective`].
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Max-abs norm, the stopping measure for both optimizers.
pub fn grad_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

struct LinePoint {
    alpha: f64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Minimizer of the cubic interpolating two points with slopes,
/// safeguarded into the inner 80% of the bracket.
fn interpolate(lo: &LinePoint, hi: &LinePoint) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let width = b - a;
    let mid = 0.5 * (a + b);
    if !(hi.f.is_finite() && hi.slope.is_finite()) {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if !(disc >= 0.0) {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * width.abs();
    if t.is_finite() && t > left + margin && t < right - margin {
        t
    } else {
        mid
    }
}

/// Strong-Wolfe line search by bracketing and zoom.
fn strong_wolfe<O: Objective + ?Sized>(
    obj: &O,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    alpha_init: f64,
    cfg: &OptimizerConfig,
    evals: &mut usize,
) -> std::result::Result<LinePoint, Option<LinePoint>> {
    let (c1, c2) = (cfg.wolfe_c1, cfg.wolfe_c2);
    let mut used = 0usize;
    let mut best: Option<LinePoint> = None;
    let mut probe = |alpha: f64, used: &mut usize, best: &mut Option<LinePoint>| {
        *used += 1;
        *evals += 1;
        let xn = axpy(x, alpha, d);
        let (f, g) = obj.value_grad(&xn);
        let slope = if f.is_finite() { dot(&g, d) } else { f64::NAN };
        let p = LinePoint {
            alpha,
            x: xn,
            f,
            g,
            slope,
        };
        if f.is_finite() && best.as_ref().is_none_or(|b| f < b.f) {
            *best = Some(LinePoint {
                x: p.x.clone(),
                g: p.g.clone(),
                ..p
            });
        }
        p
    };
    let armijo_fails = |p: &LinePoint| !p.f.is_finite() || p.f > f0 + c1 * p.alpha * slope0;
    let curvature_ok = |p: &LinePoint| p.slope.abs() <= -c2 * slope0;

    let mut prev = LinePoint {
        alpha: 0.0,
        x: x.to_vec(),
        f: f0,
        g: Vec::new(),
        slope: slope0,
    };
    let mut alpha = alpha_init;
    let (mut lo, mut hi);
    loop {
        if used >= cfg.max_line_search_evals {
            return Err(best);
        }
        let cur = probe(alpha, &mut used, &mut best);
        if armijo_fails(&cur) || (prev.alpha > 0.0 && cur.f >= prev.f) {
            lo = prev;
            hi = cur;
            break;
        }
        if curvature_ok(&cur) {
            return Ok(cur);
        }
        if cur.slope >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        alpha *= 2.0;
        prev = cur;
    }
    loop {
        if used >= cfg.max_line_search_evals {
            return Err(best);
        }
        let a = interpolate(&lo, &hi);
        if a == lo.alpha || a == hi.alpha {
            return Err(best);
        }
        let cur = probe(a, &mut used, &mut best);
        if armijo_fails(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature_ok(&cur) {
                return Ok(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
}

/// A failed line search counts as convergence when no probe improved the
/// objective by more than this fraction of its magnitude.
pub const STALL_RTOL: f64 = 1e-12;
/// Gradient norm above which a stalled search is still reported as failure.
pub const STALL_GRAD_TOL: f64 = 1e-2;

/// Polak–Ribière (PR+) nonlinear conjugate gradient with a strong-Wolfe
/// line search. Restarts along steepest descent whenever `β` clips to 0
/// and every `10·dim` iterations.
pub fn minimize_cg<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimizerConfig) -> Minimum {
    let dim = obj.dim();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_grad(&x);
    let mut evals = 1;
    let mut trace = Vec::new();
    let mut gn = grad_norm(&g);
    if cfg.trace {
        trace.push(TraceRow {
            iter: 0,
            nll: f,
            grad_norm: gn,
        });
    }
    let done = |x: Vec<f64>, f: f64, gn: f64, it: usize, evals: usize, conv: bool, trace: Vec<TraceRow>| Minimum {
        x,
        value: f,
        grad_norm: gn,
        iterations: it,
        evaluations: evals,
        converged: conv,
        trace,
    };
    if !f.is_finite() || !gn.is_finite() {
        return done(x, f, gn, 0, evals, false, trace);
    }
    if gn <= cfg.grad_tol {
        return done(x, f, gn, 0, evals, true, trace);
    }
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut f_old = f + 0.5 * g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let restart_every = (10 * dim).max(1);
    for k in 0..cfg.max_iters {
        let mut slope = dot(&g, &d);
        let mut steepest = false;
        if !(slope < 0.0) {
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
            steepest = true;
        }
        let guess = 1.01 * 2.0 * (f - f_old) / slope;
        let alpha0 = if guess > 0.0 && guess.is_finite() { guess.min(1.0) } else { 1.0 };
        let mut step = strong_wolfe(obj, &x, f, slope, &d, alpha0, cfg, &mut evals);
        if step.is_err() && !steepest {
            d = g.iter().map(|v| -v).collect();
            let slope_sd = dot(&g, &d);
            let guess = 1.01 * 2.0 * (f - f_old) / slope_sd;
            let alpha0 = if guess > 0.0 && guess.is_finite() { guess.min(1.0) } else { 1.0 };
            step = strong_wolfe(obj, &x, f, slope_sd, &d, alpha0, cfg, &mut evals);
        }
        let p = match step {
            Ok(p) => p,
            Err(best) => {
                let stalled = best.as_ref().is_none_or(|b| f - b.f <= STALL_RTOL * f.abs().max(1.0));
                if let Some(b) = best.filter(|b| b.f < f) {
                    x = b.x;
                    f = b.f;
                    gn = grad_norm(&b.g);
                }
                return done(x, f, gn, k, evals, stalled && gn <= STALL_GRAD_TOL, trace);
            }
        };
        let g_new = p.g;
        let gg = dot(&g, &g);
        let beta = (dot(&g_new, &g_new) - dot(&g_new, &g)) / gg;
        let beta = if beta.is_finite() { beta.max(0.0) } else { 0.0 };
        if beta == 0.0 || (k + 1) % restart_every == 0 {
            d = g_new.iter().map(|v| -v).collect();
        } else {
            d = g_new.iter().zip(&d).map(|(gi, di)| -gi + beta * di).collect();
        }
        f_old = f;
        x = p.x;
        f = p.f;
        g = g_new;
        gn = grad_norm(&g);
        if cfg.trace {
            trace.push(TraceRow {
                iter: k + 1,
                nll: f,
                grad_norm: gn,
            });
        }
        if gn <= cfg.grad_tol {
            return done(x, f, gn, k + 1, evals, true, trace);
        }
    }
    done(x, f, gn, cfg.max_iters, evals, false, trace)
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Full-batch Adam for exactly `cfg.epochs` steps, returning the best
/// iterate seen. Stops early only if the objective becomes non-finite.
pub fn minimize_adam<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimizerConfig) -> Minimum {
    let dim = obj.dim();
    let mut x = x0.to_vec();
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    let mut trace = Vec::new();
    let mut evals = 0;
    let mut finite = true;
    let mut steps = 0;
    for t in 1..=cfg.epochs + 1 {
        let (f, g) = obj.value_grad(&x);
        evals += 1;
        let gn = grad_norm(&g);
        if !f.is_finite() || !gn.is_finite() {
            finite = false;
            break;
        }
        if cfg.trace {
            trace.push(TraceRow {
                iter: t - 1,
                nll: f,
                grad_norm: gn,
            });
        }
        if f < best.0 {
            best = (f, x.clone(), gn);
        }
        if t > cfg.epochs {
            break;
        }
        let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
        for i in 0..dim {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            let mh = m[i] / bc1;
            let vh = v[i] / bc2;
            x[i] -= cfg.learning_rate * mh / (vh.sqrt() + ADAM_EPS);
        }
        steps = t;
    }
    let (value, x, gn) = best;
    Minimum {
        x,
        value,
        grad_norm: gn,
        iterations: steps,
        evaluations: evals,
        converged: finite && value.is_finite(),
        trace,
    }
}

pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimizerConfig) -> Minimum {
    match cfg.method {
        Method::Cg => minimize_cg(obj, x0, cfg),
        Method::Adam => minimize_adam(obj, x0, cfg),
    }
}

/// Central-difference gradient with step `1e-6 · max(1, |xᵢ|)`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    fd_gradient_step(f, x, 1e-6)
}

pub fn fd_gradient_step<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], rel: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let dn = f(&xp);
            xp[i] = x[i];
            (up - dn) / (2.0 * h)
        })
        .collect()
}

/// Negative log marginal likelihood as a function of the unconstrained
/// parameter vector.
pub struct NllObjective<'a> {
    obs: &'a ObservationSet,
    kind: ModelKind,
    rho: f64,
    transform: ParamTransform,
    gradient: GradientMethod,
    policy: JitterPolicy,
    labels: Vec<ObsLabel>,
    y: Vec<f64>,
    last_jitter: Cell<f64>,
    max_jitter: Cell<f64>,
}

impl<'a> NllObjective<'a> {
    pub fn new(obs: &'a ObservationSet, kind: ModelKind, rho: f64) -> Result<Self> {
        if kind == ModelKind::Single && obs.values.contains_key(&crate::CurveId::Delta) {
            return domain("single-curve model cannot explain tenor-delta observations");
        }
        if !(-1.0..=1.0).contains(&rho) {
            return domain("rho must lie in [-1, 1]");
        }
        Ok(NllObjective {
            obs,
            kind,
            rho,
            transform: ParamTransform::for_model(kind),
            gradient: GradientMethod::Analytic,
            policy: JitterPolicy::default(),
            labels: obs.labels(),
            y: obs.stacked_values(),
            last_jitter: Cell::new(0.0),
            max_jitter: Cell::new(0.0),
        })
    }

    pub fn with_gradient(mut self, g: GradientMethod) -> Self {
        self.gradient = g;
        self
    }

    pub fn with_jitter(mut self, p: JitterPolicy) -> Self {
        self.policy = p;
        self
    }

    pub fn transform(&self) -> &ParamTransform {
        &self.transform
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Jitter added by the most recent evaluation.
    pub fn last_jitter(&self) -> f64 {
        self.last_jitter.get()
    }

    /// Largest jitter added by any evaluation so far.
    pub fn max_jitter(&self) -> f64 {
        self.max_jitter.get()
    }

    /// Constrained model parameters for an unconstrained point.
    pub fn params_at(&self, u: &[f64]) -> Result<ModelParams> {
        ModelParams::from_slice(self.kind, &self.transform.to_constrained(u), self.rho)
    }

    fn record(&self, jitter: f64) {
        self.last_jitter.set(jitter);
        if jitter > self.max_jitter.get() {
            self.max_jitter.set(jitter);
        }
    }

    fn nll_value(&self, u: &[f64]) -> f64 {
        let Ok(p) = self.params_at(u) else { return BARRIER };
        match log_marginal_likelihood_at(&p, &self.labels, &self.y, self.obs.maturity(), self.obs.noise_var, &self.policy) {
            Ok(e) if e.value.is_finite() => {
                self.record(e.jitter);
                -e.value
            }
            _ => BARRIER,
        }
    }

    fn dual_params<const N: usize>(&self, u: &[f64]) -> ModelParams<Dual<N>> {
        let d: Vec<Dual<N>> = u
            .iter()
            .enumerate()
            .map(|(i, &x)| self.transform.apply(self.transform.maps[i], Dual::variable(x, i)))
            .collect();
        match self.kind {
            ModelKind::Single => ModelParams::Single(factor_from(&d)),
            ModelKind::Multi => ModelParams::Multi(MultiCurveParams {
                factor1: factor_from(&d[..4]),
                factor2: factor_from(&d[4..]),
                rho: self.rho,
            }),
        }
    }

    fn analytic<const N: usize>(&self, u: &[f64]) -> (f64, Vec<f64>) {
        if self.params_at(u).is_err() {
            return (BARRIER, vec![f64::NAN; N]);
        }
        let p = self.dual_params::<N>(u);
        match lml_dual(&p, &self.labels, &self.y, self.obs.maturity(), self.obs.noise_var, &self.policy) {
            Ok(e) if e.value.is_finite() && e.gradient.iter().all(|g| g.is_finite()) => {
                self.record(e.jitter);
                (-e.value, e.gradient.iter().map(|g| -g).collect())
            }
            _ => (BARRIER, vec![f64::NAN; N]),
        }
    }
}

impl Objective for NllObjective<'_> {
    fn dim(&self) -> usize {
        self.kind.n_params()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.nll_value(x)
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self.gradient {
            GradientMethod::Analytic => match self.kind {
                ModelKind::Single => self.analytic::<4>(x),
                ModelKind::Multi => self.analytic::<8>(x),
            },
            GradientMethod::FiniteDifference => {
                let f = self.nll_value(x);
                if !f.is_finite() {
                    return (BARRIER, vec![f64::NAN; x.len()]);
                }
                let jitter = self.last_jitter();
                let g = fd_gradient(|p| self.nll_value(p), x);
                self.last_jitter.set(jitter);
                (f, g)
            }
        }
    }
}

/// Uniform draw in constrained space, returned in optimizer coordinates.
pub fn random_init<R: Rng + ?Sized>(kind: ModelKind, ranges: &InitRanges, rng: &mut R) -> Result<Vec<f64>> {
    ranges.validate()?;
    let draw = |(a, b): (f64, f64), rng: &mut R| {
        let u: f64 = rng.random();
        a + (b - a) * u
    };
    let mut p = Vec::with_capacity(kind.n_params());
    for _ in 0..kind.n_params() / 4 {
        p.push(draw(ranges.r0, rng));
        p.push(draw(ranges.kappa, rng));
        p.push(draw(ranges.theta, rng));
        p.push(draw(ranges.sigma, rng));
    }
    ParamTransform::for_model(kind).to_unconstrained(&p)
}

/// Fitted parameters and optimizer diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: ModelParams,
    pub final_nll: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub grad_norm_final: f64,
    pub jitter_used: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

/// Calibrates starting from constrained parameters `start`.
pub fn calibrate_from(obs: &ObservationSet, start: &ModelParams, cfg: &OptimizerConfig) -> Result<CalibrationResult> {
    cfg.validate()?;
    start.validate()?;
    let kind = start.kind();
    let objective = NllObjective::new(obs, kind, start.rho())?
        .with_gradient(cfg.gradient)
        .with_jitter(cfg.jitter);
    let x0 = objective.transform().to_unconstrained(&start.to_vec())?;
    run(&objective, &x0, cfg)
}

/// Calibrates from a random start drawn with `rng`.
pub fn calibrate<R: Rng + ?Sized>(
    obs: &ObservationSet,
    kind: ModelKind,
    rho: f64,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<CalibrationResult> {
    cfg.validate()?;
    let objective = NllObjective::new(obs, kind, rho)?
        .with_gradient(cfg.gradient)
        .with_jitter(cfg.jitter);
    let x0 = random_init(kind, &cfg.init_ranges, rng)?;
    run(&objective, &x0, cfg)
}

fn run(objective: &NllObjective<'_>, x0: &[f64], cfg: &OptimizerConfig) -> Result<CalibrationResult> {
    let min = minimize(objective, x0, cfg);
    let params = objective.params_at(&min.x)?;
    Ok(CalibrationResult {
        params,
        final_nll: min.value,
        iterations: min.iterations,
        evaluations: min.evaluations,
        converged: min.converged && min.value.is_finite(),
        grad_norm_final: min.grad_norm,
        jitter_used: objective.max_jitter(),
        trace: min.trace,
    })
}
