use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vasicek_gp::config::FileConfig;
use vasicek_gp::harness::{predict_band, run_experiment, GridSpec};
use vasicek_gp::metrics::{split_and_evaluate, SplitStrategy};
use vasicek_gp::optimize::calibrate;
use vasicek_gp::simulator::{rng_from_seed, simulate_seeded};
use vasicek_gp::{io, CalibrationResult, CurveId, Error, Method, ModelKind, ModelParams, PredictionRequest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "vasicek-gp", version, about = "Gaussian process calibration of Vasicek short-rate models")]
struct Cli {
    /// Random seed (simulation, initialization or split, per subcommand).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with [model], [grid], [optimizer], [experiment], [predict], [metrics] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for `experiment`. Defaults to stdout where possible.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for `experiment`; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate log-bond prices under the configured model.
    Simulate {
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        curves: Option<Vec<CurveId>>,
    },
    /// Fit model parameters to a series by maximum marginal likelihood.
    Calibrate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "single")]
        model: ModelKind,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        /// Bond maturity; read from the series sidecar when omitted.
        #[arg(long)]
        maturity: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise_var: f64,
        /// Also write the per-iteration trace to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Condition on part of a series and write the confidence band.
    Predict {
        #[arg(long)]
        input: PathBuf,
        /// JSON with model parameters or a calibration result.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Number of leading observations to condition on.
        #[arg(long)]
        prefix: Option<usize>,
        /// Further observation indices to condition on.
        #[arg(long, value_delimiter = ',')]
        extra: Option<Vec<usize>>,
        /// Target times; defaults to every time in the series.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<f64>>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        maturity: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise_var: f64,
    },
    /// Run a seeded batch of simulate-and-calibrate runs.
    Experiment {
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        n_runs: Option<usize>,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Score predictions on a train/validation split of a series.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        train_fraction: Option<f64>,
        /// Shuffle time points (seeded by --seed) instead of a prefix split.
        #[arg(long)]
        random: bool,
        #[arg(long)]
        maturity: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise_var: f64,
    },
}

fn load_params(path: Option<&Path>, file: &FileConfig) -> vasicek_gp::Result<ModelParams> {
    let Some(path) = path else {
        return file
            .model
            .ok_or_else(|| Error::Config("no --params file and no [model] section".into()));
    };
    let text = std::fs::read_to_string(path)?;
    if let Ok(r) = serde_json::from_str::<CalibrationResult>(&text) {
        return Ok(r.params);
    }
    let p: ModelParams = serde_json::from_str(&text)?;
    p.validate()?;
    Ok(p)
}

fn output(out: Option<&Path>) -> vasicek_gp::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json_to<T: serde::Serialize>(out: Option<&Path>, value: &T) -> vasicek_gp::Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn run(cli: Cli) -> vasicek_gp::Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate { model, n_points, curves } => {
            let mut exp = file.experiment_config();
            if let Some(kind) = model.filter(|&k| k != exp.model_kind()) {
                exp = match kind {
                    ModelKind::Single => vasicek_gp::harness::ExperimentConfig::single_curve_default(),
                    ModelKind::Multi => vasicek_gp::harness::ExperimentConfig::multi_curve_default(0.0),
                };
            }
            if let Some(n) = n_points {
                exp.grid = GridSpec::one_year(n);
            }
            exp.curves = curves.or(exp.curves);
            exp.validate()?;
            let seed = cli.seed.unwrap_or(exp.master_seed);
            let series = simulate_seeded(&exp.true_params, &exp.curves(), &exp.grid.build()?, seed)?;
            match (cli.format, out) {
                (Format::Json, o) => write_json_to(o, &series),
                (Format::Csv, Some(p)) => io::write_series(p, &series),
                (Format::Csv, None) => io::write_series_to(std::io::stdout().lock(), &series),
            }
        }
        Command::Calibrate {
            input,
            model,
            method,
            epochs,
            rho,
            maturity,
            noise_var,
            trace,
        } => {
            let obs = io::read_observations(&input, maturity, noise_var)?;
            let mut cfg = file.optimizer.clone().unwrap_or_default();
            if let Some(m) = method {
                cfg.method = m;
            }
            cfg.epochs = epochs.unwrap_or(cfg.epochs);
            cfg.trace |= trace.is_some();
            let seed = cli.seed.unwrap_or(cfg.seed);
            let fit = calibrate(&obs, model, rho, &cfg, &mut rng_from_seed(seed))?;
            if let Some(t) = &trace {
                io::write_trace_csv(t, &fit.trace)?;
            }
            match cli.format {
                Format::Json => write_json_to(out, &fit),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(output(out)?);
                    let mut header = vec!["converged", "nll", "iterations", "grad_norm"];
                    header.extend(model.param_names());
                    w.write_record(&header)?;
                    let mut row = vec![
                        fit.converged.to_string(),
                        fit.final_nll.to_string(),
                        fit.iterations.to_string(),
                        fit.grad_norm_final.to_string(),
                    ];
                    row.extend(fit.params.to_vec().iter().map(f64::to_string));
                    w.write_record(&row)?;
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Command::Predict {
            input,
            params,
            prefix,
            extra,
            targets,
            level,
            maturity,
            noise_var,
        } => {
            let obs = io::read_observations(&input, maturity, noise_var)?;
            let params = load_params(params.as_deref(), &file)?;
            let prefix = prefix.or(file.predict.prefix).unwrap_or(obs.len());
            let extra = extra.or_else(|| file.predict.extra.clone()).unwrap_or_default();
            let level = level.or(file.predict.level).unwrap_or(0.95);
            let times = targets.unwrap_or_else(|| obs.grid.points().to_vec());
            let req = PredictionRequest::grid(&times, &obs.curves())?;
            let band = predict_band(&obs, &params, prefix, &extra, &req, level)?;
            match (cli.format, out) {
                (Format::Json, o) => write_json_to(o, &band),
                (Format::Csv, Some(p)) => io::write_band_csv(p, &band),
                (Format::Csv, None) => io::write_band_to(std::io::stdout().lock(), &band),
            }
        }
        Command::Experiment {
            model,
            n_runs,
            method,
            epochs,
        } => {
            let mut exp = file.experiment_config();
            if let Some(kind) = model.filter(|&k| k != exp.model_kind()) {
                let base = match kind {
                    ModelKind::Single => vasicek_gp::harness::ExperimentConfig::single_curve_default(),
                    ModelKind::Multi => vasicek_gp::harness::ExperimentConfig::multi_curve_default(0.0),
                };
                exp.true_params = base.true_params;
                exp.grid = base.grid;
                exp.curves = None;
            }
            exp.n_runs = n_runs.unwrap_or(exp.n_runs);
            if let Some(m) = method {
                exp.optimizer.method = m;
            }
            exp.optimizer.epochs = epochs.unwrap_or(exp.optimizer.epochs);
            exp.master_seed = cli.seed.unwrap_or(exp.master_seed);
            exp.threads = cli.threads.unwrap_or(exp.threads);
            exp.output_dir = out.map(Path::to_path_buf).or(exp.output_dir);
            let result = run_experiment(&exp)?;
            if exp.output_dir.is_none() {
                write_json_to(None, &result.summary)?;
            }
            Ok(())
        }
        Command::Metrics {
            input,
            params,
            train_fraction,
            random,
            maturity,
            noise_var,
        } => {
            let obs = io::read_observations(&input, maturity, noise_var)?;
            let params = load_params(params.as_deref(), &file)?;
            let mut spec = file.metrics.unwrap_or_default();
            spec.train_fraction = train_fraction.unwrap_or(spec.train_fraction);
            if random {
                spec.strategy = SplitStrategy::Random {
                    seed: cli.seed.unwrap_or(0),
                };
            }
            let report = split_and_evaluate(&params, &obs, &spec)?;
            match cli.format {
                Format::Json => write_json_to(out, &report),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(output(out)?);
                    w.write_record(["smse", "msll", "n_validation"])?;
                    w.write_record([
                        report.smse.to_string(),
                        report.msll.to_string(),
                        report.residuals.len().to_string(),
                    ])?;
                    w.flush()?;
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
