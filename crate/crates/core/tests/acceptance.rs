//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion. Failed criteria are listed at the end;
//! set `ACCEPTANCE_STRICT=1` to also exit non-zero when any fail.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vasicek_gp::affine::{cov_log_bond, mean_log_bond, mixed_second_moment, short_rate_mean};
use vasicek_gp::gpr::{assemble_prior, log_marginal_likelihood_grad, posterior};
use vasicek_gp::harness::{run_experiment, BatchSummary, ExperimentConfig, StatsBlock};
use vasicek_gp::metrics::{msll, smse, split, SplitSpec};
use vasicek_gp::optimize::{minimize_adam, minimize_cg, Objective};
use vasicek_gp::simulator::{rng_from_seed, simulate_correlated_ou, simulate_seeded};
use vasicek_gp::{
    CurveId, GaussianBelief, ModelKind, ModelParams, MultiCurveParams, ObsLabel, ObservationSet, OptimizerConfig,
    PredictionRequest, SingleCurveParams, TimeGrid,
};

const MASTER_SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(value: f64, center: f64, half_width: f64) -> bool {
    (value - center).abs() <= half_width
}

/// Statistics used for acceptance: converged runs, falling back to all.
fn stats(summary: &BatchSummary) -> &StatsBlock {
    summary
        .converged
        .as_ref()
        .or(summary.all.as_ref())
        .expect("batch produced no results")
}

fn batch(mut cfg: ExperimentConfig, optimizer: OptimizerConfig) -> BatchSummary {
    cfg.optimizer = optimizer;
    cfg.master_seed = MASTER_SEED;
    cfg.n_runs = 100;
    let started = Instant::now();
    let out = run_experiment(&cfg).expect("batch runs");
    eprintln!(
        "  batch {:?}/{:?}: {} runs in {:.1?}, {} converged",
        cfg.model_kind(),
        cfg.optimizer.method,
        cfg.n_runs,
        started.elapsed(),
        out.summary.n_converged
    );
    out.summary
}

fn check_windows(block: &StatsBlock, names: &[&str], windows: &[(f64, f64)]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, &(c, w)) in names.iter().zip(windows) {
        let m = block.mean(name).expect("parameter present");
        let hit = within(m, c, w);
        ok &= hit;
        parts.push(format!("{name}={m:.4}{}", if hit { "" } else { "(out)" }));
    }
    (ok, parts.join(" "))
}

fn criterion_1(cg: &BatchSummary) -> Outcome {
    let block = stats(cg);
    let (ok, detail) = check_windows(
        block,
        &["r0", "kappa", "theta", "sigma"],
        &[(0.496, 0.05), (2.081, 0.25), (0.104, 0.06), (0.202, 0.012)],
    );
    outcome(ok, format!("{detail} (n={}, converged {}/100)", block.n, cg.n_converged))
}

fn criterion_2(adam: &BatchSummary, cg: &BatchSummary) -> Outcome {
    let block = stats(adam);
    let (ok, detail) = check_windows(
        block,
        &["r0", "kappa", "theta", "sigma"],
        &[(0.510, 0.06), (2.339, 0.35), (0.121, 0.06), (0.213, 0.012)],
    );
    let k_adam = block.mean("kappa").unwrap();
    let k_cg = stats(cg).mean("kappa").unwrap();
    let shift = k_adam > k_cg;
    outcome(
        ok && shift,
        format!("{detail}; kappa Adam {k_adam:.4} vs CG {k_cg:.4} ({})", if shift { "larger" } else { "not larger" }),
    )
}

fn criterion_3(multi: &BatchSummary) -> Outcome {
    let block = stats(multi);
    let (ok, detail) = check_windows(
        block,
        &["r0_1", "kappa_1", "theta_1", "sigma_1", "sigma_2"],
        &[(0.477, 0.08), (1.994, 0.35), (0.101, 0.08), (0.150, 0.03), (0.602, 0.15)],
    );
    let (sd1, sd2) = (block.stdev("theta_1").unwrap(), block.stdev("theta_2").unwrap());
    outcome(
        ok && sd2 > sd1,
        format!(
            "{detail}; sd(theta_2)={sd2:.4} vs sd(theta_1)={sd1:.4} (n={}, converged {}/100)",
            block.n, multi.n_converged
        ),
    )
}

/// Sample covariance of two equally long series and its standard error.
fn sample_cov(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let c = prods.iter().sum::<f64>() / (n - 1.0);
    let var = prods.iter().map(|p| (p - c) * (p - c)).sum::<f64>() / (n - 1.0);
    (c, (var / n).sqrt())
}

fn sample_moment(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let m = prods.iter().sum::<f64>() / n;
    let var = prods.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn criterion_4() -> Outcome {
    let f1 = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap();
    let f2 = SingleCurveParams::new(0.7, 0.5, 0.03, 0.8).unwrap();
    let m = MultiCurveParams::new(f1, f2, 0.6).unwrap();
    let params: ModelParams = m.into();
    let maturity = 1.5;
    let times = [0.25, 0.5, 1.0];
    let grid = TimeGrid::new(times.to_vec(), maturity).unwrap();
    let draws = 1_000_000;
    let mut rng = rng_from_seed(404);
    // factor paths, stored per time point
    let mut r1 = vec![Vec::with_capacity(draws); 3];
    let mut r2 = vec![Vec::with_capacity(draws); 3];
    for _ in 0..draws {
        let (a, b) = simulate_correlated_ou(&m, &grid, &mut rng);
        for k in 0..3 {
            r1[k].push(a[k]);
            r2[k].push(b[k]);
        }
    }
    let tau = |t: f64| maturity - t;
    let b1 = |t: f64| vasicek_gp::affine::affine_b(f1.kappa, tau(t)).unwrap();
    let b2 = |t: f64| vasicek_gp::affine::affine_b(f2.kappa, tau(t)).unwrap();
    let zero: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let base = mean_log_bond(&params, CurveId::Zero, times[k], maturity).unwrap()
                + b1(times[k]) * short_rate_mean(&f1, times[k]);
            r1[k].iter().map(|x| base - b1(times[k]) * x).collect()
        })
        .collect();
    let delta: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let t = times[k];
            let phi = vasicek_gp::affine::phi(&m, tau(t)).unwrap();
            r1[k].iter().zip(&r2[k]).map(|(x, y)| phi - b1(t) * x + b2(t) * y).collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..3 {
        for j in 0..3 {
            for (ca, cb, xa, xb) in [
                (CurveId::Zero, CurveId::Zero, &zero, &zero),
                (CurveId::Zero, CurveId::Delta, &zero, &delta),
                (CurveId::Delta, CurveId::Delta, &delta, &delta),
            ] {
                let expect = cov_log_bond(&params, ca, cb, times[i], times[j], maturity).unwrap();
                let (c, se) = sample_cov(&xa[i], &xb[j]);
                worst = worst.max((c - expect).abs() / se);
                count += 1;
            }
            let expect = mixed_second_moment(&m, times[i], times[j]);
            let (c, se) = sample_moment(&r1[i], &r2[j]);
            worst = worst.max((c - expect).abs() / se);
            count += 1;
        }
    }
    outcome(worst <= 4.0, format!("{count} moments, worst deviation {worst:.2} SE (10^6 draws)"))
}

fn random_params(kind: ModelKind, rng: &mut ChaCha8Rng) -> ModelParams {
    let mut f = || {
        SingleCurveParams::new(
            rng.random_range(0.0..1.0),
            rng.random_range(0.2..4.0),
            rng.random_range(0.0..0.3),
            rng.random_range(0.05..0.8),
        )
        .unwrap()
    };
    match kind {
        ModelKind::Single => f().into(),
        ModelKind::Multi => {
            let (a, b) = (f(), f());
            MultiCurveParams::new(a, b, rng.random_range(-0.9..0.9)).unwrap().into()
        }
    }
}

fn criterion_5() -> Outcome {
    let truth: ModelParams = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap().into();
    let grid = TimeGrid::uniform(50, 0.02, 1.02).unwrap();
    let series = simulate_seeded(&truth, &[CurveId::Zero], &grid, 11).unwrap();
    let obs = ObservationSet::from_series(&series, 0.0).unwrap();
    let post = posterior(&truth, &obs, &PredictionRequest::new(obs.labels()).unwrap()).unwrap();
    let prior = assemble_prior(&truth, &obs.labels(), obs.maturity(), 0.0).unwrap();
    let y = obs.stacked_values();
    let mut worst_rel: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for i in 0..y.len() {
        worst_rel = worst_rel.max((post.mean[i] - y[i]).abs() / y[i].abs().max(1e-300));
        worst_var = worst_var.max(post.cov[(i, i)].abs() / prior.cov[(i, i)]);
    }
    let exact = worst_rel <= 1e-8 && worst_var <= 1e-6;

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut monotone = 0;
    for k in 0..100 {
        let kind = if k % 2 == 0 { ModelKind::Single } else { ModelKind::Multi };
        let params = random_params(kind, &mut rng);
        let n = 12;
        let maturity = 1.0 + rng.random_range(0.01..0.5);
        let grid = TimeGrid::uniform(n, 1.0 / n as f64, maturity).unwrap();
        let s = simulate_seeded(&params, kind.curves(), &grid, 1000 + k).unwrap();
        let full = ObservationSet::from_series(&s, 1e-6).unwrap();
        let mut idx: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
        if idx.is_empty() {
            idx.push(0);
        }
        let inner: Vec<usize> = idx.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        let small = full.subset(&inner).unwrap();
        let large = full.subset(&idx).unwrap();
        let targets: Vec<ObsLabel> = (0..6)
            .map(|_| ObsLabel::new(rng.random_range(0.0..1.0), kind.curves()[rng.random_range(0..kind.curves().len())]))
            .collect();
        let req = PredictionRequest::new(targets).unwrap();
        let a = posterior(&params, &small, &req).unwrap();
        let b = posterior(&params, &large, &req).unwrap();
        let ok = (0..req.targets.len()).all(|i| b.cov[(i, i)] <= a.cov[(i, i)] + 1e-12 * a.cov[(i, i)].abs().max(1e-12));
        monotone += ok as usize;
    }
    outcome(
        exact && monotone == 100,
        format!(
            "max rel mean error {worst_rel:.2e}, max variance ratio {worst_var:.2e}; nested monotone {monotone}/100"
        ),
    )
}

fn max_rel(a: &GaussianBelief, b: &GaussianBelief) -> f64 {
    let scale_m = a.mean.amax().max(1e-300);
    let scale_c = a.cov.amax().max(1e-300);
    let dm = (&a.mean - &b.mean).amax() / scale_m;
    let dc = (&a.cov - &b.cov).amax() / scale_c;
    dm.max(dc)
}

fn criterion_6() -> Outcome {
    let single = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap();
    let degenerate = SingleCurveParams::new(0.0, 0.9, 0.0, 0.0).unwrap();
    let multi: ModelParams = MultiCurveParams::new(single, degenerate, 0.0).unwrap().into();
    let grid = TimeGrid::uniform(100, 0.01, 1.01).unwrap();
    let zero: Vec<ObsLabel> = grid.points().iter().map(|&t| ObsLabel::new(t, CurveId::Zero)).collect();
    let delta: Vec<ObsLabel> = grid.points().iter().map(|&t| ObsLabel::new(t, CurveId::Delta)).collect();
    let reference = assemble_prior(&single.into(), &zero, grid.maturity(), 0.0).unwrap();
    let m_zero = assemble_prior(&multi, &zero, grid.maturity(), 0.0).unwrap();
    let m_delta = assemble_prior(&multi, &delta, grid.maturity(), 0.0).unwrap();
    let (e0, e1) = (max_rel(&reference, &m_zero), max_rel(&reference, &m_delta));
    outcome(
        e0 <= 1e-12 && e1 <= 1e-12,
        format!("zero block {e0:.2e}, delta block {e1:.2e} (100 points)"),
    )
}

/// Richardson-extrapolated central difference.
fn richardson<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-3 * x[i].abs().max(1.0);
            let mut d = |h: f64| {
                xp[i] = x[i] + h;
                let up = f(&xp);
                xp[i] = x[i] - h;
                let dn = f(&xp);
                xp[i] = x[i];
                (up - dn) / (2.0 * h)
            };
            let (d1, d2) = (d(h), d(h / 2.0));
            (4.0 * d2 - d1) / 3.0
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut total = 0;
    for kind in [ModelKind::Single, ModelKind::Multi] {
        let truth = match kind {
            ModelKind::Single => ExperimentConfig::single_curve_default().true_params,
            ModelKind::Multi => ExperimentConfig::multi_curve_default(0.3).true_params,
        };
        let grid = TimeGrid::uniform(40, 0.025, 1.025).unwrap();
        let series = simulate_seeded(&truth, kind.curves(), &grid, 5).unwrap();
        let obs = ObservationSet::from_series(&series, 0.0).unwrap();
        for _ in 0..20 {
            let mut p = random_params(kind, &mut rng);
            if let ModelParams::Multi(m) = &mut p {
                m.rho = 0.3;
            }
            let analytic = log_marginal_likelihood_grad(&p, &obs).unwrap().gradient;
            let v = p.to_vec();
            let fd = richardson(
                |x| {
                    let q = ModelParams::from_slice(kind, x, p.rho()).unwrap();
                    vasicek_gp::gpr::log_marginal_likelihood(&q, &obs).unwrap()
                },
                &v,
            );
            let num: f64 = analytic.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let den: f64 = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
            worst = worst.max(num / den);
            total += 1;
        }
    }
    outcome(worst <= 1e-3, format!("{total} points, worst relative error {worst:.2e}"))
}

struct Quadratic;

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        2
    }
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (0.5 * (x[0] * x[0] + 10.0 * x[1] * x[1]), vec![x[0], 10.0 * x[1]])
    }
}

struct Rosenbrock;

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        (f, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
    }
}

fn criterion_8() -> Outcome {
    let cfg = OptimizerConfig {
        trace: true,
        ..OptimizerConfig::default()
    };
    let rb = minimize_cg(&Rosenbrock, &[-1.2, 1.0], &cfg);
    let monotone = rb.trace.windows(2).all(|w| w[1].nll <= w[0].nll);
    let adam = minimize_adam(&Quadratic, &[1.0, 1.0], &OptimizerConfig::adam(700));
    outcome(
        rb.value < 1e-6 && monotone && adam.value < 1e-4,
        format!(
            "Rosenbrock {:.2e} in {} iterations (monotone: {monotone}); Adam bowl {:.2e} after {} steps",
            rb.value, rb.iterations, adam.value, adam.iterations
        ),
    )
}

fn criterion_9() -> Outcome {
    let targets = [0.3, -1.2, 2.5, 0.7, 1.9];
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let s = smse(&[mean; 5], &targets).unwrap();

    let truth: ModelParams = SingleCurveParams::new(0.5, 2.0, 0.1, 0.2).unwrap().into();
    let grid = TimeGrid::single_curve_default();
    let series = simulate_seeded(&truth, &[CurveId::Zero], &grid, 3).unwrap();
    let obs = ObservationSet::from_series(&series, 0.0).unwrap();
    let (train, validation) = split(&obs, &SplitSpec::default()).unwrap();
    let tv = &train.values[&CurveId::Zero];
    let m0 = tv.iter().sum::<f64>() / tv.len() as f64;
    let v0 = tv.iter().map(|x| (x - m0) * (x - m0)).sum::<f64>() / tv.len() as f64;
    let trivial = GaussianBelief {
        mean: nalgebra::DVector::from_element(validation.len(), m0),
        cov: nalgebra::DMatrix::from_diagonal_element(validation.len(), validation.len(), v0),
        labels: validation.labels(),
    };
    let z = msll(&trivial, &validation.stacked_values(), &train).unwrap();

    let mut negative = 0;
    for run in 0..100 {
        let series = simulate_seeded(&truth, &[CurveId::Zero], &grid, 5000 + run).unwrap();
        let obs = ObservationSet::from_series(&series, 0.0).unwrap();
        let report = vasicek_gp::metrics::split_and_evaluate(&truth, &obs, &SplitSpec::default()).unwrap();
        negative += (report.msll < 0.0) as usize;
    }
    outcome(
        (s - 1.0).abs() <= 1e-12 && z.abs() <= 1e-12 && negative >= 95,
        format!("SMSE(mean) - 1 = {:.1e}; MSLL(trivial) = {z:.1e}; MSLL < 0 in {negative}/100", s - 1.0),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for threads in [1, 8] {
        let mut cfg = ExperimentConfig::single_curve_default();
        cfg.n_runs = 6;
        cfg.grid = vasicek_gp::harness::GridSpec::one_year(60);
        cfg.master_seed = MASTER_SEED;
        cfg.threads = threads;
        cfg.output_dir = Some(dir.path().join(format!("t{threads}")));
        run_experiment(&cfg).unwrap();
        bytes.push(std::fs::read(dir.path().join(format!("t{threads}/summary.json"))).unwrap());
    }
    let same = bytes[0] == bytes[1];
    outcome(same, format!("summary.json {} at 1 and 8 threads ({} bytes)", if same { "identical" } else { "differs" }, bytes[0].len()))
}

fn main() {
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut record = |n: usize, o: Outcome| {
        println!("criterion {n:>2}: {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };
    record(4, criterion_4());
    record(5, criterion_5());
    record(6, criterion_6());
    record(7, criterion_7());
    record(8, criterion_8());
    record(9, criterion_9());
    record(10, criterion_10());
    let cg = batch(ExperimentConfig::single_curve_default(), OptimizerConfig::default());
    record(1, criterion_1(&cg));
    let adam = batch(ExperimentConfig::single_curve_default(), OptimizerConfig::adam(700));
    record(2, criterion_2(&adam, &cg));
    let multi = batch(ExperimentConfig::multi_curve_default(0.0), OptimizerConfig::default());
    record(3, criterion_3(&multi));

    results.sort_by_key(|(n, _)| *n);
    println!("\nsummary");
    for (n, o) in &results {
        println!("criterion {n:>2}: {}", if o.pass { "PASS" } else { "FAIL" });
    }
    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
