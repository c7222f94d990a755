//! Sectioned TOML settings shared by the command-line subcommands.
//!
//! ```toml
//! [model]
//! model = "single"
//! r0 = 0.5
//! kappa = 2.0
//! theta = 0.1
//! sigma = 0.2
//!
//! [grid]
//! n_points = 250
//! dt = 0.004
//! maturity = 1.004
//!
//! [optimizer]
//! method = "cg"
//!
//! [experiment]
//! n_runs = 100
//! ```
//!
//! Every section and key is optional; command-line flags override them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affine::{CurveId, ModelParams};
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, GridSpec};
use crate::metrics::SplitSpec;
use crate::optimize::OptimizerConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_runs: Option<usize>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub curves: Option<Vec<CurveId>>,
    pub noise_var: Option<f64>,
    pub threads: Option<usize>,
    pub bins: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    pub prefix: Option<usize>,
    pub extra: Option<Vec<usize>>,
    pub level: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelParams>,
    pub grid: Option<GridSpec>,
    pub optimizer: Option<OptimizerConfig>,
    pub experiment: ExperimentSection,
    pub predict: PredictSection,
    pub metrics: Option<SplitSpec>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Experiment settings from the file, falling back to the default
    /// batch for the configured model.
    pub fn experiment_config(&self) -> ExperimentConfig {
        let mut cfg = match self.model {
            Some(p @ ModelParams::Multi(m)) => ExperimentConfig {
                true_params: p,
                ..ExperimentConfig::multi_curve_default(m.rho)
            },
            Some(p) => ExperimentConfig {
                true_params: p,
                ..ExperimentConfig::single_curve_default()
            },
            None => ExperimentConfig::single_curve_default(),
        };
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(o) = &self.optimizer {
            cfg.optimizer = o.clone();
        }
        let e = &self.experiment;
        cfg.n_runs = e.n_runs.unwrap_or(cfg.n_runs);
        cfg.master_seed = e.master_seed.unwrap_or(cfg.master_seed);
        cfg.output_dir = e.output_dir.clone().or(cfg.output_dir);
        cfg.curves = e.curves.clone().or(cfg.curves);
        cfg.noise_var = e.noise_var.unwrap_or(cfg.noise_var);
        cfg.threads = e.threads.unwrap_or(cfg.threads);
        cfg.bins = e.bins.unwrap_or(cfg.bins);
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::ModelKind;
    use crate::optimize::Method;

    #[test]
    fn sections_are_optional() {
        let c = FileConfig::from_toml("").unwrap();
        assert_eq!(c.experiment_config(), ExperimentConfig::single_curve_default());
    }

    #[test]
    fn sections_override_defaults() {
        let text = r#"
            [model]
            model = "multi"
            rho = 0.25
            factor1 = { r0 = 0.5, kappa = 2.0, theta = 0.1, sigma = 0.2 }
            factor2 = { r0 = 0.7, kappa = 0.5, theta = 0.03, sigma = 0.8 }

            [optimizer]
            method = "adam"
            epochs = 50

            [experiment]
            n_runs = 4
            threads = 2

            [metrics]
            train_fraction = 0.6
            strategy = { strategy = "random", seed = 3 }
        "#;
        let c = FileConfig::from_toml(text).unwrap();
        let e = c.experiment_config();
        assert_eq!(e.model_kind(), ModelKind::Multi);
        assert_eq!(e.true_params.rho(), 0.25);
        assert_eq!(e.grid.n_points, 125);
        assert_eq!(e.optimizer.method, Method::Adam);
        assert_eq!(e.optimizer.epochs, 50);
        assert_eq!((e.n_runs, e.threads), (4, 2));
        assert_eq!(c.metrics.unwrap().train_fraction, 0.6);
        assert!(e.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(FileConfig::from_toml("[grid]\nbogus = 1"), Err(Error::Config(_))));
        assert!(matches!(FileConfig::from_toml("[nope]"), Err(Error::Config(_))));
    }
}
