//! Named experiments, their configuration, and the files they write.
//!
//! A run takes an [`ExperimentConfig`], computes an [`ExperimentReport`] plus
//! zero or more CSV tables, and writes them under the configured output
//! directory as `<experiment>.report.json` and `<experiment>.<table>.csv`.
//! Nothing in a report depends on the clock unless `record_timing` is set, so
//! identical configs give byte-identical files.

mod config;
mod hvs;
mod report;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::metrics::{
    bias_curve, concentration, integral_curve, ks_p_value, ks_statistic, log_grid, render_error,
    trial_rng, KernelCurve, DEFAULT_GRID_MIN,
};
use crate::ray_pdf::{draw_uniforms, maxblur, RayPdf, RayWeights, SampleMode};
use crate::scenes::{CatalogScene, DensityScene};

pub use config::{validate, ExperimentConfig, SceneSpec};
pub use hvs::classical_hvs;
pub use report::{Comparison, ExperimentReport, KernelRow};

/// Largest KS distance the distribution audit accepts.
pub const AUDIT_MAX_D: f64 = 0.002;

/// Largest deviation from the classical inversion the HVS regression accepts.
pub const HVS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BiasCurves,
    IntegralCurves,
    Concentration,
    Ablation,
    DistributionAudit,
    HvsRegression,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::BiasCurves,
        Experiment::IntegralCurves,
        Experiment::Concentration,
        Experiment::Ablation,
        Experiment::DistributionAudit,
        Experiment::HvsRegression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::BiasCurves => "bias-curves",
            Experiment::IntegralCurves => "integral-curves",
            Experiment::Concentration => "concentration",
            Experiment::Ablation => "ablation",
            Experiment::DistributionAudit => "distribution-audit",
            Experiment::HvsRegression => "hvs-regression",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::BiasCurves => "barycenter of each kernel against a with b = 1",
            Experiment::IntegralCurves => "unit-interval mass of each kernel against a with b = 1",
            Experiment::Concentration => "fine-sample distance to the true surface, paired over trials",
            Experiment::Ablation => "render error per kernel on every catalog scene",
            Experiment::DistributionAudit => "KS test of sampled positions against the exact CDF",
            Experiment::HvsRegression => "deviation from classical piecewise-uniform inversion",
        }
    }

    fn is_curve(self) -> bool {
        matches!(self, Experiment::BiasCurves | Experiment::IntegralCurves)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// The `<table>` part of `<experiment>.<table>.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: impl IntoIterator<Item = String>) -> Self {
        Table {
            name: name.to_string(),
            header: header.into_iter().collect(),
            rows: Vec::new(),
        }
    }
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub tables: Vec<Table>,
}

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn names(kinds: &[KernelKind]) -> impl Iterator<Item = String> + '_ {
    kinds.iter().map(|k| k.name().to_string())
}

fn timed<T>(record: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let start = record.then(Instant::now);
    let value = f()?;
    Ok((value, start.map(|s| s.elapsed().as_secs_f64())))
}

/// Computes the configured experiment without writing anything.
pub fn compute(config: &ExperimentConfig) -> Result<Outcome> {
    config.check()?;
    let mut report = ExperimentReport::new(config);
    let tables = match config.experiment {
        Experiment::BiasCurves | Experiment::IntegralCurves => curves(config, &mut report)?,
        Experiment::Concentration => concentration_experiment(config, &mut report)?,
        Experiment::Ablation => ablation(config, &mut report)?,
        Experiment::DistributionAudit => audit(config, &mut report)?,
        Experiment::HvsRegression => hvs_regression(config, &mut report)?,
    };
    report.outputs = tables
        .iter()
        .map(|t| format!("{}.{}.csv", config.experiment, t.name))
        .collect();
    Ok(Outcome { report, tables })
}

/// Computes the configured experiment and writes its report and tables.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let outcome = compute(config)?;
    write_outcome(&outcome, &config.output)?;
    Ok(outcome.report)
}

fn output_error(path: &Path, err: impl fmt::Display) -> Error {
    Error::Output {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

/// Writes `<dir>/<experiment>.report.json` and one CSV per table.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let experiment = outcome.report.experiment;
    for table in &outcome.tables {
        let path = dir.join(format!("{experiment}.{}.csv", table.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| output_error(&path, e))?;
        w.write_record(&table.header)
            .map_err(|e| output_error(&path, e))?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| output_error(&path, e))?;
        }
        w.flush().map_err(|e| output_error(&path, e))?;
    }
    let path = dir.join(format!("{experiment}.report.json"));
    let mut json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| output_error(&path, e))
}

fn curves(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<Vec<Table>> {
    let bias = config.experiment == Experiment::BiasCurves;
    let grid = log_grid(config.grid_points, DEFAULT_GRID_MIN, 1.0);
    let kinds: Vec<KernelKind> = config
        .kernels
        .iter()
        .copied()
        .filter(|k| k.is_interpolating())
        .collect();
    let mut curves: Vec<KernelCurve> = Vec::new();
    for &kind in &config.kernels {
        if !kind.is_interpolating() {
            let mut row = KernelRow::new(kind, None);
            row.note = Some("no unit-interval shape; omitted from the curves".into());
            report.rows.push(row);
            continue;
        }
        let (curve, secs) = timed(config.record_timing, || {
            if bias {
                bias_curve(kind, &grid)
            } else {
                integral_curve(kind, &grid)
            }
        })?;
        let v = &curve.values;
        let mut row = KernelRow::new(kind, None)
            .with("min", v.iter().copied().fold(f64::INFINITY, f64::min))
            .with("max", v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .with("at_smallest_a", v[0])
            .with("at_a_equal_b", v[v.len() - 1]);
        row.wall_clock_seconds = secs;
        report.rows.push(row);
        curves.push(curve);
    }

    let find = |k: KernelKind| curves.iter().find(|c| c.kind == k);
    if bias {
        let non_increasing = curves
            .iter()
            .all(|c| c.values.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        report.checks.insert("non-increasing-in-a".into(), non_increasing);
        if let (Some(e), Some(i)) = (find(KernelKind::Exponential), find(KernelKind::Inverse)) {
            let gap = e
                .values
                .iter()
                .zip(&i.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            report.checks.insert("exponential-equals-inverse".into(), gap <= 1e-9);
        }
    } else if let (Some(i), Some(e), Some(l)) = (
        find(KernelKind::Inverse),
        find(KernelKind::Exponential),
        find(KernelKind::Linear),
    ) {
        let ordered = (0..grid.len())
            .all(|j| i.values[j] <= e.values[j] && e.values[j] <= l.values[j]);
        report
            .checks
            .insert("inverse-le-exponential-le-linear".into(), ordered);
    }

    let mut table = Table::new(
        if bias { "bias" } else { "integral" },
        std::iter::once("a".to_string()).chain(names(&kinds)),
    );
    for (j, &a) in grid.iter().enumerate() {
        let mut row = vec![num(a)];
        row.extend(curves.iter().map(|c| num(c.values[j])));
        table.rows.push(row);
    }
    Ok(vec![table])
}

fn concentration_experiment(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
) -> Result<Vec<Table>> {
    let scene = config.scene.resolve()?;
    let settings = config.trial_settings();
    let mut reports = Vec::new();
    for &kind in &config.kernels {
        let (r, secs) = timed(config.record_timing, || {
            concentration(&scene, kind, &settings)
        })?;
        let mut row = KernelRow::new(kind, None)
            .with("mean_distance", r.mean_distance)
            .with("std_distance", r.std_distance)
            .with("samples", r.samples as f64)
            .with("fallback_trials", r.fallback_trials as f64);
        row.wall_clock_seconds = secs;
        report.rows.push(row);
        reports.push(r);
    }
    let arms: Vec<_> = reports.iter().map(|r| (r.kind, r.per_trial.clone())).collect();
    report.comparisons = report::all_pairs(None, "mean_distance", &arms);

    let mut distance = Table::new(
        "distance",
        std::iter::once("trial".to_string()).chain(names(&config.kernels)),
    );
    for trial in 0..config.n_trials {
        let mut row = vec![trial.to_string()];
        row.extend(reports.iter().map(|r| num(r.per_trial[trial])));
        distance.rows.push(row);
    }
    let mut frequency = Table::new(
        "frequencies",
        std::iter::once("interval".to_string()).chain(
            config
                .kernels
                .iter()
                .flat_map(|k| [k.name().to_string(), format!("{}-expected", k.name())]),
        ),
    );
    for i in 0..config.n_coarse - 1 {
        let mut row = vec![i.to_string()];
        for r in &reports {
            row.push(num(r.frequencies[i]));
            row.push(num(r.expected_frequencies[i]));
        }
        frequency.rows.push(row);
    }
    Ok(vec![distance, frequency])
}

/// The catalog scenes, followed by the configured scene when it is not one of them.
fn ablation_scenes(config: &ExperimentConfig) -> Result<Vec<(String, DensityScene)>> {
    let mut scenes: Vec<_> = CatalogScene::ALL
        .iter()
        .map(|s| (s.name().to_string(), s.scene()))
        .collect();
    if let SceneSpec::Inline(_) = config.scene {
        scenes.push((config.scene.label().to_string(), config.scene.resolve()?));
    }
    Ok(scenes)
}

fn ablation(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<Vec<Table>> {
    let settings = config.trial_settings();
    let mut errors = Table::new(
        "errors",
        ["scene", "kernel", "reference", "mean_error", "std_error", "fallback_trials"]
            .map(String::from),
    );
    let mut trials = Table::new(
        "trials",
        ["scene".to_string(), "trial".to_string()]
            .into_iter()
            .chain(names(&config.kernels)),
    );
    for (label, scene) in ablation_scenes(config)? {
        let mut arms = Vec::new();
        for &kind in &config.kernels {
            let (stats, secs) = timed(config.record_timing, || {
                render_error(&scene, kind, &settings)
            })?;
            let mut row = KernelRow::new(kind, Some(&label))
                .with("reference", stats.reference)
                .with("mean_error", stats.mean)
                .with("std_error", stats.std)
                .with("fallback_trials", stats.fallback_trials as f64);
            row.wall_clock_seconds = secs;
            report.rows.push(row);
            errors.rows.push(vec![
                label.clone(),
                kind.name().to_string(),
                num(stats.reference),
                num(stats.mean),
                num(stats.std),
                stats.fallback_trials.to_string(),
            ]);
            arms.push((kind, stats.per_trial));
        }
        for trial in 0..config.n_trials {
            let mut row = vec![label.clone(), trial.to_string()];
            row.extend(arms.iter().map(|(_, v)| num(v[trial])));
            trials.rows.push(row);
        }
        report
            .comparisons
            .extend(report::all_pairs(Some(&label), "render_error", &arms));
    }
    Ok(vec![errors, trials])
}

/// Random ray weights on `intervals` intervals starting at 0.
///
/// Interval lengths vary by a factor of four and weights are cubes of uniforms,
/// so neighbouring ratios span several decades and some fall under the clamp.
pub fn audit_weights<R: Rng + ?Sized>(intervals: usize, rng: &mut R) -> Result<RayWeights> {
    let mut t = Vec::with_capacity(intervals + 1);
    t.push(0.0);
    for i in 0..intervals {
        let gap: f64 = 0.25 + 0.75 * rng.random::<f64>();
        t.push(t[i] + gap);
    }
    let w = (0..=intervals).map(|_| rng.random::<f64>().powi(3)).collect();
    RayWeights::new(t, w)
}

fn audit(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<Vec<Table>> {
    let weights = audit_weights(config.audit_intervals, &mut trial_rng(config.seed, 0))?;
    let n = config.audit_samples;
    let (lo, hi) = (weights.knots()[0], weights.knots()[weights.len() - 1]);
    let grid: Vec<f64> = (0..=256).map(|j| lo + (hi - lo) * j as f64 / 256.0).collect();
    let mut columns = Vec::new();
    for &kind in &config.kernels {
        let pdf = RayPdf::build(&weights, kind)?;
        // each kernel gets its own stream, fixed by kind rather than list position
        let stream = 1 + KernelKind::ALL.iter().position(|&k| k == kind).unwrap_or(0);
        let ((d, sorted), secs) = timed(config.record_timing, || {
            // KS assumes independent draws, so the audit ignores `sample_mode`.
            let u = draw_uniforms(n, SampleMode::Independent, &mut trial_rng(config.seed, stream));
            let mut x: Vec<f64> = u.iter().map(|&u| pdf.invert(u)).collect();
            x.sort_by(f64::total_cmp);
            Ok((ks_statistic(&x, |t| pdf.cdf(t)), x))
        })?;
        let mut row = KernelRow::new(kind, None)
            .with("ks_d", d)
            .with("ks_p", ks_p_value(d, n))
            .with("samples", n as f64);
        row.wall_clock_seconds = secs;
        report.rows.push(row);
        report
            .checks
            .insert(format!("ks-d-below-limit-{kind}"), d < AUDIT_MAX_D);
        let exact: Vec<f64> = grid.iter().map(|&t| pdf.cdf(t)).collect();
        let empirical: Vec<f64> = grid
            .iter()
            .map(|&t| sorted.partition_point(|&x| x <= t) as f64 / n as f64)
            .collect();
        columns.push((exact, empirical));
    }

    let mut cdf = Table::new(
        "cdf",
        std::iter::once("t".to_string()).chain(
            config
                .kernels
                .iter()
                .flat_map(|k| [k.name().to_string(), format!("{}-empirical", k.name())]),
        ),
    );
    for (j, &t) in grid.iter().enumerate() {
        let mut row = vec![num(t)];
        for (exact, empirical) in &columns {
            row.push(num(exact[j]));
            row.push(num(empirical[j]));
        }
        cdf.rows.push(row);
    }
    let mut knots = Table::new("weights", ["t", "w"].map(String::from));
    for (t, w) in weights.knots().iter().zip(weights.weights()) {
        knots.rows.push(vec![num(*t), num(*w)]);
    }
    Ok(vec![cdf, knots])
}

/// Largest distance between library samples and classical HVS samples on one ray.
fn hvs_deviation(
    scene: &DensityScene,
    kind: KernelKind,
    config: &ExperimentConfig,
    trial: usize,
) -> Result<f64> {
    let mut rng = trial_rng(config.seed, trial);
    let coarse = if config.jitter {
        scene.coarse_stage(config.n_coarse, Some(&mut rng))?
    } else {
        scene.coarse_stage::<rand_chacha::ChaCha8Rng>(config.n_coarse, None)?
    };
    let weights = if config.maxblur && !coarse.is_zero() {
        maxblur(&coarse)
    } else {
        coarse
    };
    let pdf = RayPdf::build(&weights, kind)?;
    let batch = pdf.sample_with(config.n_fine, config.sample_mode, &mut rng.clone())?;
    let uniforms = draw_uniforms(config.n_fine, config.sample_mode, &mut rng);

    let t = weights.knots();
    let w = weights.weights();
    let clamp = |x: f64| x.max(crate::kernels::MIN_WEIGHT);
    let masses: Vec<f64> = if batch.fallback {
        t.windows(2).map(|p| p[1] - p[0]).collect()
    } else {
        (0..t.len() - 1)
            .map(|i| (t[i + 1] - t[i]) * 0.5 * (clamp(w[i]) + clamp(w[i + 1])))
            .collect()
    };
    let mut classical = classical_hvs(t, &masses, &uniforms);
    classical.sort_by(f64::total_cmp);
    Ok(batch
        .positions
        .iter()
        .zip(&classical)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn hvs_regression(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<Vec<Table>> {
    let scene = config.scene.resolve()?;
    let mut table = Table::new(
        "deviation",
        std::iter::once("trial".to_string()).chain(names(&config.kernels)),
    );
    let mut per_kernel = Vec::new();
    for &kind in &config.kernels {
        let (devs, secs) = timed(config.record_timing, || {
            (0..config.n_trials)
                .map(|trial| hvs_deviation(&scene, kind, config, trial))
                .collect::<Result<Vec<f64>>>()
        })?;
        let worst = devs.iter().copied().fold(0.0, f64::max);
        let mut row = KernelRow::new(kind, None)
            .with("max_abs_deviation", worst)
            .with("rays", config.n_trials as f64);
        row.wall_clock_seconds = secs;
        report.rows.push(row);
        if kind == KernelKind::Constant {
            report
                .checks
                .insert("constant-matches-classical".into(), worst <= HVS_TOLERANCE);
        }
        per_kernel.push(devs);
    }
    for trial in 0..config.n_trials {
        let mut row = vec![trial.to_string()];
        row.extend(per_kernel.iter().map(|d| num(d[trial])));
        table.rows.push(row);
    }
    Ok(vec![table])
}
