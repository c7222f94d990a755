//! Seeded Monte Carlo calibration batches and their summaries.
//!
//! Each run `i` owns a generator seeded with `sub_seed(master_seed, i)`.
//! It simulates a series under the true parameters, draws a random
//! start and calibrates. Runs are independent, so the batch result does
//! not depend on how they are scheduled across threads.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{CurveId, ModelKind, ModelParams, MultiCurveParams, SingleCurveParams};
use crate::error::{Error, Result};
use crate::gpr::{confidence_band, posterior, ConfidenceInterval, ObservationSet, PredictionRequest};
use crate::io;
use crate::optimize::{calibrate, CalibrationResult, OptimizerConfig};
use crate::simulator::{rng_from_seed, simulate_log_bonds, sub_seed, TimeGrid};

/// `n_points` observations `dt, 2dt, …` of a bond maturing at `maturity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_points: usize,
    pub dt: f64,
    pub maturity: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.n_points, self.dt, self.maturity)
    }

    /// Grid whose bond matures one step after the last observation.
    pub fn one_year(n_points: usize) -> Self {
        let dt = 1.0 / n_points as f64;
        GridSpec {
            n_points,
            dt,
            maturity: (n_points + 1) as f64 * dt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub true_params: ModelParams,
    pub n_runs: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Defaults to every curve the model can produce.
    #[serde(default)]
    pub curves: Option<Vec<CurveId>>,
    #[serde(default)]
    pub noise_var: f64,
    /// Worker threads; 0 means the available parallelism.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    50
}

impl ExperimentConfig {
    /// 250 daily observations of the zero curve under
    /// `(r₀, κ, θ, σ) = (0.5, 2, 0.1, 0.2)`.
    pub fn single_curve_default() -> Self {
        ExperimentConfig {
            true_params: SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).expect("valid").into(),
            n_runs: 100,
            grid: GridSpec::one_year(250),
            optimizer: OptimizerConfig::default(),
            master_seed: 0,
            output_dir: None,
            curves: None,
            noise_var: 0.0,
            threads: 0,
            bins: default_bins(),
        }
    }

    /// 125 observations per curve of both curves; factor 2 is
    /// `(0.7, 0.5, 0.03, 0.8)`.
    pub fn multi_curve_default(rho: f64) -> Self {
        let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).expect("valid");
        let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8).expect("valid");
        ExperimentConfig {
            true_params: MultiCurveParams { factor1: f1, factor2: f2, rho }.into(),
            grid: GridSpec::one_year(125),
            ..Self::single_curve_default()
        }
    }

    pub fn model_kind(&self) -> ModelKind {
        self.true_params.kind()
    }

    pub fn curves(&self) -> Vec<CurveId> {
        self.curves
            .clone()
            .unwrap_or_else(|| self.model_kind().curves().to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_runs == 0 {
            return cfg("n_runs must be at least 1");
        }
        if self.bins == 0 {
            return cfg("bins must be at least 1");
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return cfg("noise_var must be non-negative");
        }
        let curves = self.curves();
        if curves.is_empty() {
            return cfg("at least one curve is required");
        }
        if self.model_kind() == ModelKind::Single && curves.contains(&CurveId::Delta) {
            return cfg("the single-curve model has no tenor-delta curve");
        }
        self.true_params
            .validate()
            .and_then(|_| self.optimizer.validate())
            .and_then(|_| self.grid.build().map(|_| ()))
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Outcome of one run; `result` is absent when the run failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub result: Option<CalibrationResult>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        self.result.as_ref().is_some_and(|r| r.converged)
    }
}

/// Simulates and calibrates run `run_id` of the batch.
pub fn run_single(config: &ExperimentConfig, run_id: usize) -> RunRecord {
    let seed = sub_seed(config.master_seed, run_id as u64);
    let started = Instant::now();
    let outcome = (|| {
        let mut rng = rng_from_seed(seed);
        let grid = config.grid.build()?;
        let series = simulate_log_bonds(&config.true_params, &config.curves(), &grid, &mut rng)?;
        let obs = ObservationSet::from_series(&series, config.noise_var)?;
        calibrate(&obs, config.model_kind(), config.true_params.rho(), &config.optimizer, &mut rng)
    })();
    log::info!("run {run_id} finished in {:.2?}", started.elapsed());
    match outcome {
        Ok(r) => RunRecord {
            run_id,
            seed,
            result: Some(r),
            error: None,
        },
        Err(e) => {
            log::warn!("run {run_id} failed: {e}");
            RunRecord {
                run_id,
                seed,
                result: None,
                error: Some(e.to_string()),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub name: String,
    pub mean: f64,
    pub stdev: f64,
    pub min: f64,
    pub max: f64,
}

/// Equal-width histogram; `edges` has one more entry than `counts`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub name: String,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Statistics of one set of calibration results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsBlock {
    pub n: usize,
    pub params: Vec<ParamStats>,
    pub histograms: Vec<Histogram>,
}

impl StatsBlock {
    pub fn mean(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.mean)
    }

    pub fn stdev(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.stdev)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub model_kind: ModelKind,
    pub true_params: ModelParams,
    pub n_runs: usize,
    pub n_failed: usize,
    pub n_converged: usize,
    pub convergence_rate: f64,
    /// Over converged runs only.
    pub converged: Option<StatsBlock>,
    /// Over every run that returned parameters.
    pub all: Option<StatsBlock>,
}

/// Welford mean and `N-1` standard deviation.
fn mean_stdev(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    let var = if values.len() > 1 { m2 / (values.len() - 1) as f64 } else { 0.0 };
    (mean, var.sqrt())
}

/// Equal-width bins spanning `[min, max]`. A degenerate range is widened
/// to `[v - 0.5, v + 0.5]`.
pub fn histogram(name: &str, values: &[f64], bins: usize) -> Histogram {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    let mut counts = vec![0; bins];
    for &v in values {
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Histogram {
        name: name.to_string(),
        edges,
        counts,
    }
}

/// Per-parameter mean, standard deviation and histogram.
pub fn summarize(results: &[CalibrationResult], bins: usize) -> Result<StatsBlock> {
    let Some(first) = results.first() else {
        return Err(Error::Domain("cannot summarize an empty batch".into()));
    };
    if bins == 0 {
        return Err(Error::Domain("bins must be at least 1".into()));
    }
    let kind = first.params.kind();
    if results.iter().any(|r| r.params.kind() != kind) {
        return Err(Error::Domain("results mix model kinds".into()));
    }
    let vectors: Vec<Vec<f64>> = results.iter().map(|r| r.params.to_vec()).collect();
    let mut params = Vec::new();
    let mut histograms = Vec::new();
    for (j, name) in kind.param_names().iter().enumerate() {
        let column: Vec<f64> = vectors.iter().map(|v| v[j]).collect();
        let (mean, stdev) = mean_stdev(&column);
        params.push(ParamStats {
            name: name.to_string(),
            mean,
            stdev,
            min: column.iter().copied().fold(f64::INFINITY, f64::min),
            max: column.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
        histograms.push(histogram(name, &column, bins));
    }
    Ok(StatsBlock {
        n: results.len(),
        params,
        histograms,
    })
}

/// Converged and unfiltered statistics of a batch, in run order.
pub fn summarize_runs(config: &ExperimentConfig, records: &[RunRecord]) -> Result<BatchSummary> {
    let all: Vec<CalibrationResult> = records.iter().filter_map(|r| r.result.clone()).collect();
    let converged: Vec<CalibrationResult> = all.iter().filter(|r| r.converged).cloned().collect();
    let block = |v: &[CalibrationResult]| if v.is_empty() { Ok(None) } else { summarize(v, config.bins).map(Some) };
    Ok(BatchSummary {
        model_kind: config.model_kind(),
        true_params: config.true_params,
        n_runs: records.len(),
        n_failed: records.len() - all.len(),
        n_converged: converged.len(),
        convergence_rate: converged.len() as f64 / records.len() as f64,
        converged: block(&converged)?,
        all: block(&all)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub summary: BatchSummary,
}

/// Runs the whole batch and, if `output_dir` is set, writes its files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let started = Instant::now();
    let records: Vec<RunRecord> = pool.install(|| {
        (0..config.n_runs)
            .into_par_iter()
            .map(|i| run_single(config, i))
            .collect()
    });
    log::info!("{} runs finished in {:.2?}", config.n_runs, started.elapsed());
    let summary = summarize_runs(config, &records)?;
    if let Some(dir) = &config.output_dir {
        write_outputs(dir, config, &records, &summary)?;
    }
    Ok(ExperimentOutput { records, summary })
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `params.csv`, `summary.json`, `hist_<param>.csv` and, when traces
/// were recorded, `trace_<run>.csv`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, records: &[RunRecord], summary: &BatchSummary) -> Result<()> {
    fs::create_dir_all(dir)?;
    let names = config.model_kind().param_names();
    let mut w = csv::Writer::from_path(dir.join("params.csv"))?;
    let mut header = vec!["run_id", "converged", "nll"];
    header.extend(names.iter().copied());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.run_id.to_string(), r.converged().to_string()];
        row.push(opt_field(r.result.as_ref().map(|c| c.final_nll)));
        match &r.result {
            Some(c) => row.extend(c.params.to_vec().iter().map(f64::to_string)),
            None => row.extend(names.iter().map(|_| String::new())),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    io::write_json(&dir.join("summary.json"), summary)?;
    if let Some(block) = summary.converged.as_ref().or(summary.all.as_ref()) {
        for h in &block.histograms {
            write_histogram_csv(&dir.join(format!("hist_{}.csv", h.name)), h)?;
        }
    }
    for r in records {
        if let Some(c) = r.result.as_ref().filter(|c| !c.trace.is_empty()) {
            io::write_trace_csv(&dir.join(format!("trace_{}.csv", r.run_id)), &c.trace)?;
        }
    }
    Ok(())
}

pub fn write_histogram_csv(path: &Path, h: &Histogram) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_left", "bin_right", "count"])?;
    for (k, c) in h.counts.iter().enumerate() {
        w.write_record([h.edges[k].to_string(), h.edges[k + 1].to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_histogram_csv(path: &Path) -> Result<Histogram> {
    let t = io::Table::read(path)?;
    let (l, r, c) = (t.column("bin_left")?, t.column("bin_right")?, t.column("count")?);
    let mut edges = Vec::new();
    let mut counts = Vec::new();
    for row in 0..t.rows.len() {
        if row == 0 {
            edges.push(t.f64_at(row, l)?);
        }
        edges.push(t.f64_at(row, r)?);
        let raw = t.str_at(row, c)?;
        counts.push(raw.parse::<usize>().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: t.line(row),
            message: format!("'{raw}' is not a count"),
        })?);
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_prefix("hist_"))
        .unwrap_or_default()
        .to_string();
    Ok(Histogram { name, edges, counts })
}

/// Conditions on the first `prefix` observations of `obs`, plus the
/// observations at `extra` indices, and returns the band at `targets`.
pub fn predict_band(
    obs: &ObservationSet,
    params: &ModelParams,
    prefix: usize,
    extra: &[usize],
    targets: &PredictionRequest,
    level: f64,
) -> Result<Vec<ConfidenceInterval>> {
    let mut idx: Vec<usize> = (0..prefix.min(obs.len())).collect();
    for &i in extra {
        if i >= obs.len() {
            return Err(Error::Domain(format!("observation index {i} out of range")));
        }
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    let belief = posterior(params, &obs.subset(&idx)?, targets)?;
    confidence_band(&belief, level)
}
