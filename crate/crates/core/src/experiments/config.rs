use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::metrics::{TrialSettings, DEFAULT_GRID_POINTS};
use crate::ray_pdf::SampleMode;
use crate::scenes::{CatalogScene, DensityScene};

use super::Experiment;

/// A catalog scene by name, or a scene written out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSpec {
    Named(String),
    Inline(DensityScene),
}

impl SceneSpec {
    pub fn resolve(&self) -> Result<DensityScene> {
        match self {
            SceneSpec::Named(name) => CatalogScene::from_name(name)
                .map(CatalogScene::scene)
                .ok_or_else(|| {
                    let known: Vec<_> = CatalogScene::ALL.iter().map(|s| s.name()).collect();
                    Error::config(
                        "scene",
                        format!("unknown scene `{name}`, expected one of {}", known.join(", ")),
                    )
                }),
            SceneSpec::Inline(scene) => {
                scene
                    .validate()
                    .map_err(|e| Error::config("scene", e.to_string()))?;
                Ok(scene.clone())
            }
        }
    }

    /// Label used in reports and CSV rows.
    pub fn label(&self) -> &str {
        match self {
            SceneSpec::Named(name) => name,
            SceneSpec::Inline(_) => "custom",
        }
    }
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec::Named(CatalogScene::SharpBump.name().to_string())
    }
}

/// Everything a run needs. Missing keys take their defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub scene: SceneSpec,
    pub kernels: Vec<KernelKind>,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub maxblur: bool,
    pub jitter: bool,
    pub sample_mode: SampleMode,
    /// Points on the log-spaced `a` grid of the curve experiments.
    pub grid_points: usize,
    /// Samples per kernel in the distribution audit.
    pub audit_samples: usize,
    /// Intervals of the random density in the distribution audit.
    pub audit_intervals: usize,
    /// Adds wall-clock seconds per arm to the report, which makes it non-reproducible.
    pub record_timing: bool,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let trials = TrialSettings::default();
        ExperimentConfig {
            experiment: Experiment::BiasCurves,
            scene: SceneSpec::default(),
            kernels: KernelKind::INTERPOLATING.to_vec(),
            n_coarse: trials.n_coarse,
            n_fine: trials.n_fine,
            n_trials: trials.n_trials,
            seed: trials.seed,
            maxblur: trials.maxblur,
            jitter: trials.jitter,
            sample_mode: trials.mode,
            grid_points: DEFAULT_GRID_POINTS,
            audit_samples: 1_000_000,
            audit_intervals: 16,
            record_timing: false,
            output: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn trial_settings(&self) -> TrialSettings {
        TrialSettings {
            n_coarse: self.n_coarse,
            n_fine: self.n_fine,
            n_trials: self.n_trials,
            seed: self.seed,
            maxblur: self.maxblur,
            jitter: self.jitter,
            mode: self.sample_mode,
        }
    }

    /// Range checks that serde cannot express.
    pub fn check(&self) -> Result<()> {
        let positive = |field: &str, value: usize, min: usize| {
            if value < min {
                Err(Error::config(field, format!("must be at least {min}, got {value}")))
            } else {
                Ok(())
            }
        };
        positive("n_coarse", self.n_coarse, 2)?;
        let min_fine = if self.experiment == Experiment::Ablation { 2 } else { 1 };
        positive("n_fine", self.n_fine, min_fine)?;
        positive("n_trials", self.n_trials, 1)?;
        positive("grid_points", self.grid_points, 2)?;
        positive("audit_samples", self.audit_samples, 1)?;
        positive("audit_intervals", self.audit_intervals, 1)?;
        if self.kernels.is_empty() {
            return Err(Error::config("kernels", "must list at least one kernel"));
        }
        let mut seen = HashSet::new();
        for (i, k) in self.kernels.iter().enumerate() {
            if !seen.insert(*k) {
                return Err(Error::config(format!("kernels[{i}]"), format!("duplicate kernel `{k}`")));
            }
        }
        if self.experiment.is_curve() && !self.kernels.iter().any(|k| k.is_interpolating()) {
            return Err(Error::config(
                "kernels",
                "curve experiments need at least one interpolating kernel",
            ));
        }
        if self.output.as_os_str().is_empty() {
            return Err(Error::config("output", "must not be empty"));
        }
        self.scene.resolve()?;
        Ok(())
    }
}

/// Parses, defaults and range-checks a JSON config.
pub fn validate(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => "config".to_string(),
            p => p,
        };
        Error::config(field, e.inner().to_string())
    })?;
    config.check()?;
    Ok(config)
}
