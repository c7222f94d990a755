//! Gaussian process calibration of single- and multi-curve Vasiček
//! short-rate models.
//!
//! Log-bond prices in an affine Vasiček model are a Gaussian process in
//! observation time, with closed-form mean and covariance. This crate
//! builds that process ([`affine`]), simulates it exactly
//! ([`simulator`]), evaluates the marginal likelihood and posterior
//! ([`gpr`]), fits the model parameters by maximum marginal likelihood
//! ([`optimize`]), scores predictions ([`metrics`]) and runs seeded
//! batch experiments ([`harness`]).
//!
//! ```
//! use vasicek_gp::{simulator, CurveId, ModelParams, ObservationSet, SingleCurveParams, TimeGrid};
//!
//! let truth: ModelParams = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap().into();
//! let grid = TimeGrid::uniform(50, 0.02, 1.02).unwrap();
//! let series = simulator::simulate_seeded(&truth, &[CurveId::Zero], &grid, 7).unwrap();
//! let obs = ObservationSet::from_series(&series, 0.0).unwrap();
//! let ll = vasicek_gp::gpr::log_marginal_likelihood(&truth, &obs).unwrap();
//! assert!(ll.is_finite());
//! ```

pub mod affine;
pub mod config;
pub mod error;
pub mod gpr;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod scalar;
pub mod simulator;

pub use affine::{CurveId, ModelKind, ModelParams, MultiCurveParams, SingleCurveParams};
pub use error::{Error, Result};
pub use gpr::{GaussianBelief, ObsLabel, ObservationSet, PredictionRequest};
pub use optimize::{CalibrationResult, Method, OptimizerConfig};
pub use simulator::{SimulatedSeries, TimeGrid};
