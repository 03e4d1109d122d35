mod common;

use l0_sampler::metrics::{
    bias_curve, concentration, default_a_grid, integral_curve, render_error, sign_test,
    TrialSettings,
};
use l0_sampler::scenes::{Bump, ColorProfile, DensityScene, Profile};
use l0_sampler::{CatalogScene, KernelKind, SampleMode};

fn settings(n_trials: usize) -> TrialSettings {
    TrialSettings {
        n_trials,
        ..TrialSettings::default()
    }
}

#[test]
fn bias_curves_have_the_documented_shape() {
    let grid = default_a_grid();
    assert_eq!(grid.len(), 200);
    assert!(grid.windows(2).all(|p| p[0] < p[1]));
    assert!(grid[0] > 0.0 && grid[199] == 1.0);

    let curves: Vec<_> = KernelKind::INTERPOLATING
        .iter()
        .map(|&k| bias_curve(k, &grid).unwrap())
        .collect();
    for c in &curves {
        assert_eq!(c.b, 1.0);
        assert!(c.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(c.values.windows(2).all(|p| p[1] <= p[0] + 1e-12), "{}", c.kind);
        assert!((c.values[199] - 0.5).abs() < 1e-12);
    }
    assert!(curves[0].values.iter().all(|&v| v == 0.5));
    for (e, i) in curves[2].values.iter().zip(&curves[3].values) {
        assert!((e - i).abs() <= 1e-9);
    }
}

#[test]
fn bias_at_one_percent() {
    let c = bias_curve(KernelKind::Exponential, &[0.01]).unwrap();
    let oracle = common::quad_bias(KernelKind::Exponential, 0.01, 1.0);
    assert!((c.values[0] - oracle).abs() < 1e-6);
    assert!((oracle - 0.793).abs() < 5e-4);
}

#[test]
fn integral_curve_examples_and_ordering() {
    let grid = [0.01, 0.4];
    let at = |k| integral_curve(k, &grid).unwrap().values;
    assert!((at(KernelKind::Constant)[1] - 0.7).abs() < 1e-15);
    assert!((at(KernelKind::Linear)[1] - 0.7).abs() < 1e-15);
    let oracle = common::quad_cdf(KernelKind::Inverse, 0.01, 1.0, 1.0, 1e-15);
    assert!((at(KernelKind::Inverse)[0] - oracle).abs() < 1e-12);

    let grid = default_a_grid();
    let (i, e, l) = (
        integral_curve(KernelKind::Inverse, &grid).unwrap().values,
        integral_curve(KernelKind::Exponential, &grid).unwrap().values,
        integral_curve(KernelKind::Linear, &grid).unwrap().values,
    );
    for j in 0..grid.len() {
        assert!(i[j] <= e[j] && e[j] <= l[j], "a = {}", grid[j]);
    }
}

#[test]
fn argmax_concentration_is_one_hot() {
    let scene = CatalogScene::SharpBump.scene();
    let r = concentration(&scene, KernelKind::ArgmaxDelta, &settings(20)).unwrap();
    let hit: Vec<_> = r.frequencies.iter().filter(|&&f| f > 0.0).collect();
    assert_eq!(hit, [&1.0]);
}

#[test]
fn empty_scene_reports_fallback_and_midpoint_distance() {
    let scene = DensityScene::new(
        Profile::GaussianBump(Bump {
            center: 2.0,
            width: 0.1,
            peak: 0.0,
        }),
        [0.0, 4.0],
        ColorProfile::Constant(0.5),
    )
    .unwrap();
    let r = concentration(&scene, KernelKind::Exponential, &settings(10)).unwrap();
    assert_eq!(r.fallback_trials, 10);
    // uniform samples on [0, 4] sit on average 1 away from the midpoint
    assert!((r.mean_distance - 1.0).abs() < 0.02);
    let e = render_error(&scene, KernelKind::Linear, &settings(10)).unwrap();
    assert!(e.per_trial.iter().all(|&x| x == 0.0));
}

#[test]
fn frequencies_track_interval_mass() {
    let scene = CatalogScene::TwoSurface.scene();
    let s = TrialSettings {
        n_trials: 400,
        mode: SampleMode::Independent,
        ..TrialSettings::default()
    };
    for kind in KernelKind::ALL {
        let r = concentration(&scene, kind, &s).unwrap();
        let total: f64 = r.frequencies.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let n = r.samples as f64;
        for (f, p) in r.frequencies.iter().zip(&r.expected_frequencies) {
            let sigma = (p * (1.0 - p) / n).sqrt();
            assert!((f - p).abs() <= 3.0 * sigma + 1e-12, "{kind}: {f} vs {p}");
        }
    }
}

#[test]
fn dense_sampling_renders_smooth_scenes() {
    let scene = CatalogScene::WideBump.scene();
    let s = TrialSettings {
        n_fine: 4096,
        n_trials: 5,
        ..TrialSettings::default()
    };
    for kind in KernelKind::INTERPOLATING {
        let e = render_error(&scene, kind, &s).unwrap();
        assert!(e.mean < 1e-3, "{kind}: {}", e.mean);
    }
}

#[test]
fn arms_are_paired_through_the_coarse_stage() {
    let scene = CatalogScene::WideBump.scene();
    let s = TrialSettings {
        n_trials: 50,
        jitter: true,
        ..TrialSettings::default()
    };
    let a = render_error(&scene, KernelKind::Constant, &s).unwrap();
    let b = render_error(&scene, KernelKind::Constant, &s).unwrap();
    assert_eq!(a, b);
    let t = sign_test(&a.per_trial, &b.per_trial);
    assert_eq!((t.wins, t.losses, t.ties, t.p_value), (0, 0, 50, 1.0));
}
