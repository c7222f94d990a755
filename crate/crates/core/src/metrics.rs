//! Prediction quality: train/validation splits, SMSE and MSLL.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::affine::ModelParams;
use crate::error::{domain, Result};
use crate::gpr::{posterior, GaussianBelief, ObservationSet, PredictionRequest};
use crate::simulator::rng_from_seed;

/// Predictive variances are floored here before taking logs.
pub const VARIANCE_FLOOR: f64 = 1e-30;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum SplitStrategy {
    /// Earliest times train, latest validate.
    Prefix,
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub strategy: SplitStrategy,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            strategy: SplitStrategy::Prefix,
        }
    }
}

/// Partitions the time points of `obs` into training and validation sets.
pub fn split(obs: &ObservationSet, spec: &SplitSpec) -> Result<(ObservationSet, ObservationSet)> {
    let n = obs.len();
    if n < 2 {
        return domain(format!("need at least 2 time points to split, got {n}"));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return domain(format!("train fraction must lie in (0, 1), got {}", spec.train_fraction));
    }
    let n_train = ((n as f64 * spec.train_fraction).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    if let SplitStrategy::Random { seed } = spec.strategy {
        idx.shuffle(&mut rng_from_seed(seed));
    }
    Ok((obs.subset(&idx[..n_train])?, obs.subset(&idx[n_train..])?))
}

fn population_moments(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
    (mean, var)
}

/// Mean squared residual divided by the population variance of the targets.
pub fn smse(predicted_mean: &[f64], targets: &[f64]) -> Result<f64> {
    if predicted_mean.len() != targets.len() {
        return domain("prediction and target lengths differ");
    }
    if targets.len() < 2 {
        return domain("SMSE needs at least two targets");
    }
    let (_, var) = population_moments(targets);
    if !(var > 0.0) {
        return domain("targets have zero variance");
    }
    let mse = predicted_mean
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p) * (y - p))
        .sum::<f64>()
        / targets.len() as f64;
    Ok(mse / var)
}

fn neg_log_density(y: f64, mean: f64, var: f64) -> f64 {
    0.5 * (LN_2PI + var.ln()) + 0.5 * (y - mean) * (y - mean) / var
}

/// Mean negative log predictive density minus that of the trivial
/// Gaussian with the training data's mean and variance.
///
/// Marginal predictive variances are used per target. When the training
/// set holds several curves, the trivial model for a target uses the
/// moments of the training values on the same curve.
pub fn msll(posterior: &GaussianBelief, targets: &[f64], train: &ObservationSet) -> Result<f64> {
    if posterior.dim() != targets.len() {
        return domain("posterior dimension and target count differ");
    }
    if targets.is_empty() {
        return domain("MSLL needs at least one target");
    }
    let mut total = 0.0;
    for (i, (&y, label)) in targets.iter().zip(&posterior.labels).enumerate() {
        let var = posterior.cov[(i, i)].max(VARIANCE_FLOOR);
        let Some(train_vals) = train.values.get(&label.curve) else {
            return domain(format!("no training data on curve {}", label.curve));
        };
        if train_vals.is_empty() {
            return domain("training set is empty");
        }
        let (m0, v0) = population_moments(train_vals);
        if !(v0 > 0.0) {
            return domain("training values have zero variance");
        }
        total += neg_log_density(y, posterior.mean[i], var) - neg_log_density(y, m0, v0);
    }
    Ok(total / targets.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub smse: f64,
    pub msll: f64,
    pub residuals: Vec<f64>,
    pub predictive_variances: Vec<f64>,
}

/// Fits nothing: conditions on `train` with `params` and scores the
/// prediction of `validation`.
pub fn evaluate(params: &ModelParams, train: &ObservationSet, validation: &ObservationSet) -> Result<EvalReport> {
    let req = PredictionRequest::new(validation.labels())?;
    let post = posterior(params, train, &req)?;
    let targets = validation.stacked_values();
    let mean: Vec<f64> = post.mean.iter().copied().collect();
    Ok(EvalReport {
        smse: smse(&mean, &targets)?,
        msll: msll(&post, &targets, train)?,
        residuals: targets.iter().zip(&mean).map(|(y, m)| y - m).collect(),
        predictive_variances: post.variances(),
    })
}

/// Convenience: split, condition on the training part, score the rest.
pub fn split_and_evaluate(params: &ModelParams, obs: &ObservationSet, spec: &SplitSpec) -> Result<EvalReport> {
    let (train, validation) = split(obs, spec)?;
    evaluate(params, &train, &validation)
}
