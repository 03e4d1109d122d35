//! Diagnostics that compare kernels.
//!
//! Curves are evaluated on `b = 1` with `a` varying, which makes the bias and
//! the interval integral functions of `a` alone. The trial-based metrics run
//! the full coarse-to-fine pipeline on an analytic scene. Every kernel arm
//! uses the same per-trial random stream, so the arms can be compared
//! pairwise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{KernelKind, UnitKernel};
use crate::ray_pdf::{resample, SampleMode};
use crate::scenes::DensityScene;

/// Number of points in the default `a`-grid.
pub const DEFAULT_GRID_POINTS: usize = 200;
/// Smallest `a` in the default grid.
pub const DEFAULT_GRID_MIN: f64 = 1e-3;

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

/// The default 200-point grid on `[1e-3, 1]`.
pub fn default_a_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_POINTS, DEFAULT_GRID_MIN, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCurve {
    pub kind: KernelKind,
    pub a_grid: Vec<f64>,
    pub b: f64,
    pub values: Vec<f64>,
}

fn curve(
    kind: KernelKind,
    a_grid: &[f64],
    f: impl Fn(&UnitKernel) -> Result<f64>,
) -> Result<KernelCurve> {
    let values = a_grid
        .iter()
        .map(|&a| f(&UnitKernel::new(kind, a, 1.0)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelCurve {
        kind,
        a_grid: a_grid.to_vec(),
        b: 1.0,
        values,
    })
}

/// Barycenter of `ŵ` on `[0, 1]` for each `a` with `b = 1`.
pub fn bias_curve(kind: KernelKind, a_grid: &[f64]) -> Result<KernelCurve> {
    curve(kind, a_grid, UnitKernel::bias)
}

/// `∫₀¹ ŵ` for each `a` with `b = 1`.
pub fn integral_curve(kind: KernelKind, a_grid: &[f64]) -> Result<KernelCurve> {
    curve(kind, a_grid, UnitKernel::integral)
}

/// Shared settings for trial-based metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub n_coarse: usize,
    pub n_fine: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub maxblur: bool,
    pub jitter: bool,
    pub mode: SampleMode,
}

impl Default for TrialSettings {
    fn default() -> Self {
        TrialSettings {
            n_coarse: 64,
            n_fine: 128,
            n_trials: 1000,
            seed: 0,
            maxblur: true,
            jitter: false,
            mode: SampleMode::Stratified,
        }
    }
}

/// Random stream for one trial; independent of the kernel being evaluated.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct Trial {
    positions: Vec<f64>,
    /// Interval index of each sample and the per-interval expected fractions.
    hits: Vec<usize>,
    expected: Vec<f64>,
    fallback: bool,
}

fn run_trial(
    scene: &DensityScene,
    kind: KernelKind,
    settings: &TrialSettings,
    trial: usize,
) -> Result<Trial> {
    let mut rng = trial_rng(settings.seed, trial);
    let coarse = if settings.jitter {
        scene.coarse_stage(settings.n_coarse, Some(&mut rng))?
    } else {
        scene.coarse_stage::<ChaCha8Rng>(settings.n_coarse, None)?
    };
    let (pdf, batch) = resample(
        &coarse,
        kind,
        settings.maxblur,
        settings.n_fine,
        settings.mode,
        &mut rng,
    )?;
    let expected = if batch.fallback {
        let t = pdf.knots();
        let span = t[t.len() - 1] - t[0];
        t.windows(2).map(|p| (p[1] - p[0]) / span).collect()
    } else {
        pdf.interval_mass()
            .iter()
            .map(|m| m / pdf.total_mass())
            .collect()
    };
    let hits = batch.positions.iter().map(|&t| pdf.interval_of(t)).collect();
    Ok(Trial {
        positions: batch.positions,
        hits,
        expected,
        fallback: batch.fallback,
    })
}

/// How tightly fine samples gather around the true surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub kind: KernelKind,
    pub samples: usize,
    pub mean_distance: f64,
    pub std_distance: f64,
    /// Mean sample-to-surface distance of each trial, in trial order.
    pub per_trial: Vec<f64>,
    /// Fraction of all samples landing in each coarse interval.
    pub frequencies: Vec<f64>,
    /// Mean normalized interval mass over trials, the expectation of `frequencies`.
    pub expected_frequencies: Vec<f64>,
    pub fallback_trials: usize,
    pub seed: u64,
}

/// Sample-to-surface distance and interval hit frequencies over repeated trials.
///
/// Distances are measured to the nearest surface of `scene`, or to the extent
/// midpoint for a scene without surfaces.
pub fn concentration(
    scene: &DensityScene,
    kind: KernelKind,
    settings: &TrialSettings,
) -> Result<ConcentrationReport> {
    let intervals = settings.n_coarse - 1;
    let mut counts = vec![0usize; intervals];
    let mut expected = vec![0.0; intervals];
    let mut per_trial = Vec::with_capacity(settings.n_trials);
    let mut fallback_trials = 0;
    for trial in 0..settings.n_trials {
        let result = run_trial(scene, kind, settings, trial)?;
        let total: f64 = result
            .positions
            .iter()
            .map(|&t| scene.surface_distance(t))
            .sum();
        per_trial.push(total / result.positions.len() as f64);
        for &i in &result.hits {
            counts[i] += 1;
        }
        for (e, p) in expected.iter_mut().zip(&result.expected) {
            *e += p;
        }
        fallback_trials += usize::from(result.fallback);
    }
    let samples = settings.n_trials * settings.n_fine;
    let (mean_distance, std_distance) = mean_std(&per_trial);
    Ok(ConcentrationReport {
        kind,
        samples,
        mean_distance,
        std_distance,
        per_trial,
        frequencies: counts
            .iter()
            .map(|&c| c as f64 / samples as f64)
            .collect(),
        expected_frequencies: expected
            .iter()
            .map(|e| e / settings.n_trials as f64)
            .collect(),
        fallback_trials,
        seed: settings.seed,
    })
}

/// Absolute rendering error of fine samples against the reference color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderErrorStats {
    pub kind: KernelKind,
    pub reference: f64,
    pub mean: f64,
    pub std: f64,
    pub per_trial: Vec<f64>,
    pub fallback_trials: usize,
}

/// `|render_with_samples − render_reference|` over repeated trials.
pub fn render_error(
    scene: &DensityScene,
    kind: KernelKind,
    settings: &TrialSettings,
) -> Result<RenderErrorStats> {
    let reference = scene.render_reference();
    let mut per_trial = Vec::with_capacity(settings.n_trials);
    let mut fallback_trials = 0;
    for trial in 0..settings.n_trials {
        let result = run_trial(scene, kind, settings, trial)?;
        let estimate = scene.render_with_samples(&result.positions)?;
        per_trial.push((estimate - reference).abs());
        fallback_trials += usize::from(result.fallback);
    }
    let (mean, std) = mean_std(&per_trial);
    Ok(RenderErrorStats {
        kind,
        reference,
        mean,
        std,
        per_trial,
        fallback_trials,
    })
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One-sided paired sign test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs where the first value is smaller.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// `P(X ≥ wins)` for `X ~ Binomial(wins + losses, 1/2)`.
    pub p_value: f64,
}

/// Tests whether `first` tends to be smaller than `second`, pair by pair.
pub fn sign_test(first: &[f64], second: &[f64]) -> SignTest {
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (x, y) in first.iter().zip(second) {
        if x < y {
            wins += 1;
        } else if x > y {
            losses += 1;
        } else {
            ties += 1;
        }
    }
    SignTest {
        wins,
        losses,
        ties,
        p_value: binomial_upper_tail(wins + losses, wins),
    }
}

/// `P(X ≥ k)` for `X ~ Binomial(n, 1/2)`, summed in log space.
fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ln_n_fact = libm::lgamma(n as f64 + 1.0);
    let ln_half_n = n as f64 * std::f64::consts::LN_2;
    let sum: f64 = (k..=n)
        .map(|j| {
            let ln_choose =
                ln_n_fact - libm::lgamma(j as f64 + 1.0) - libm::lgamma((n - j) as f64 + 1.0);
            (ln_choose - ln_half_n).exp()
        })
        .sum();
    sum.min(1.0)
}

/// Kolmogorov–Smirnov statistic of `sorted` against a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a one-sample KS statistic `d` with `n` samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ Σ_{k odd} exp(−k²π²/(8λ²)), fast for small λ
        let q = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda
            * (q + q.powi(9) + q.powi(25) + q.powi(49));
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes::{CatalogScene, ColorProfile, Profile};

    fn settings(n_trials: usize) -> TrialSettings {
        TrialSettings {
            n_trials,
            ..TrialSettings::default()
        }
    }

    #[test]
    fn grid_shape() {
        let g = default_a_grid();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[199], 1.0);
        assert!(g.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn curve_examples() {
        let grid = [0.01, 0.4, 1.0];
        let c = bias_curve(KernelKind::Constant, &grid).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.5));
        let e = bias_curve(KernelKind::Exponential, &grid).unwrap();
        assert_eq!(e.values[2], 0.5);
        assert!((e.values[0] - 0.793).abs() < 1e-3);
        assert!((integral_curve(KernelKind::Constant, &grid).unwrap().values[1] - 0.7).abs() < 1e-15);
        assert!((integral_curve(KernelKind::Linear, &grid).unwrap().values[1] - 0.7).abs() < 1e-15);
        let inv = integral_curve(KernelKind::Inverse, &grid).unwrap();
        assert!((inv.values[0] - 0.046_517).abs() < 1e-6);
        assert!(bias_curve(KernelKind::ArgmaxDelta, &grid).is_err());
    }

    #[test]
    fn sign_test_values() {
        let t = sign_test(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]);
        assert_eq!((t.wins, t.losses, t.ties), (3, 0, 0));
        assert!((t.p_value - 0.125).abs() < 1e-12);
        let t = sign_test(&[1.0, 3.0], &[2.0, 3.0]);
        assert_eq!((t.wins, t.ties), (1, 1));
        assert!((t.p_value - 0.5).abs() < 1e-12);
        assert_eq!(sign_test(&[2.0], &[1.0]).p_value, 1.0);
        // P(X ≥ 60 | n = 100) from exact enumeration
        let tail = binomial_upper_tail(100, 60);
        assert!((tail - 0.028_443_966_820_490_4).abs() < 1e-12);
    }

    #[test]
    fn ks_on_uniform_grid() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_p_value(d, n) > 0.999);
        assert!(ks_p_value(0.1, 1000) < 1e-6);
    }

    #[test]
    fn ks_p_matches_kolmogorov_distribution() {
        // survival function of the limiting distribution at λ = 0.5, 1, 2
        let n = 1_000_000_000_000;
        for (lambda, want) in [(0.5, 0.963_945_24), (1.0, 0.269_999_67), (2.0, 0.000_670_93)] {
            let d = lambda / (n as f64).sqrt();
            let p = ks_p_value(d, n);
            assert!((p - want).abs() < 2e-6 * want.max(0.01), "λ={lambda}: {p}");
        }
    }

    #[test]
    fn argmax_concentration_is_one_hot() {
        let scene = CatalogScene::SharpBump.scene();
        let report = concentration(&scene, KernelKind::ArgmaxDelta, &settings(20)).unwrap();
        let nonzero: Vec<_> = report.frequencies.iter().filter(|&&f| f > 0.0).collect();
        assert_eq!(nonzero, vec![&1.0]);
        assert_eq!(report.fallback_trials, 0);
    }

    #[test]
    fn zero_density_scene_falls_back() {
        let scene = DensityScene::new(
            Profile::MultiSurface(vec![]),
            [0.0, 4.0],
            ColorProfile::Constant(0.5),
        )
        .unwrap();
        let s = settings(5);
        let report = concentration(&scene, KernelKind::Exponential, &s).unwrap();
        assert_eq!(report.fallback_trials, 5);
        // uniform samples around the midpoint of [0, 4]: mean distance ≈ 1
        assert!((report.mean_distance - 1.0).abs() < 0.01);
        let err = render_error(&scene, KernelKind::Exponential, &s).unwrap();
        assert_eq!(err.mean, 0.0);
        assert_eq!(err.fallback_trials, 5);
    }

    #[test]
    fn frequencies_sum_to_one() {
        let scene = CatalogScene::TwoSurface.scene();
        for kind in KernelKind::ALL {
            let r = concentration(&scene, kind, &settings(10)).unwrap();
            let sum: f64 = r.frequencies.iter().sum();
            let expected: f64 = r.expected_frequencies.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!((expected - 1.0).abs() < 1e-9);
            assert!(r.mean_distance >= 0.0);
        }
    }

    #[test]
    fn arms_share_randomness() {
        let scene = CatalogScene::SharpBump.scene();
        let s = TrialSettings {
            jitter: true,
            n_trials: 3,
            ..TrialSettings::default()
        };
        let mut a = trial_rng(s.seed, 1);
        let mut b = trial_rng(s.seed, 1);
        let wa = scene.coarse_stage(64, Some(&mut a)).unwrap();
        let wb = scene.coarse_stage(64, Some(&mut b)).unwrap();
        assert_eq!(wa, wb);
        let r1 = concentration(&scene, KernelKind::Linear, &s).unwrap();
        let r2 = concentration(&scene, KernelKind::Linear, &s).unwrap();
        assert_eq!(r1, r2);
    }
}
