use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kernels::KernelKind;
use crate::metrics::sign_test;

use super::config::ExperimentConfig;
use super::Experiment;

/// Metric values of one kernel arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRow {
    pub kernel: KernelKind,
    /// Scene label for experiments that run more than one scene.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scene: Option<String>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_seconds: Option<f64>,
}

impl KernelRow {
    pub(crate) fn new(kernel: KernelKind, scene: Option<&str>) -> Self {
        KernelRow {
            kernel,
            scene: scene.map(str::to_string),
            metrics: BTreeMap::new(),
            note: None,
            wall_clock_seconds: None,
        }
    }

    pub(crate) fn with(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }
}

/// Paired one-sided sign tests between two arms on a per-trial metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scene: Option<String>,
    pub metric: String,
    pub first: KernelKind,
    pub second: KernelKind,
    /// Trials where `first` is strictly lower.
    pub wins: usize,
    /// Trials where `second` is strictly lower.
    pub losses: usize,
    pub ties: usize,
    pub p_first_lower: f64,
    pub p_second_lower: f64,
}

impl Comparison {
    pub(crate) fn between(
        scene: Option<&str>,
        metric: &str,
        (first, a): (KernelKind, &[f64]),
        (second, b): (KernelKind, &[f64]),
    ) -> Self {
        let forward = sign_test(a, b);
        let backward = sign_test(b, a);
        Comparison {
            scene: scene.map(str::to_string),
            metric: metric.to_string(),
            first,
            second,
            wins: forward.wins,
            losses: forward.losses,
            ties: forward.ties,
            p_first_lower: forward.p_value,
            p_second_lower: backward.p_value,
        }
    }
}

/// The JSON document written to `<out>/<experiment>.report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub library: String,
    pub version: String,
    pub experiment: Experiment,
    /// The effective configuration; feeding it back to a run reproduces the report.
    pub config: ExperimentConfig,
    pub rows: Vec<KernelRow>,
    pub comparisons: Vec<Comparison>,
    /// Named pass/fail outcomes such as the classical-HVS match.
    pub checks: BTreeMap<String, bool>,
    /// CSV files written next to the report, by file name.
    pub outputs: Vec<String>,
}

impl ExperimentReport {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            library: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: config.experiment,
            config: config.clone(),
            rows: Vec::new(),
            comparisons: Vec::new(),
            checks: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Row for `kernel` (and `scene`, when given).
    pub fn row(&self, kernel: KernelKind, scene: Option<&str>) -> Option<&KernelRow> {
        self.rows
            .iter()
            .find(|r| r.kernel == kernel && r.scene.as_deref() == scene)
    }

    /// One-sided p-value that `lower` beats `higher`, whichever order the pair was stored in.
    pub fn p_lower(&self, scene: Option<&str>, lower: KernelKind, higher: KernelKind) -> Option<f64> {
        self.comparisons
            .iter()
            .filter(|c| c.scene.as_deref() == scene)
            .find_map(|c| match (c.first, c.second) {
                (f, s) if f == lower && s == higher => Some(c.p_first_lower),
                (f, s) if f == higher && s == lower => Some(c.p_second_lower),
                _ => None,
            })
    }
}

/// One pairwise comparison per unordered pair of arms, in config order.
pub(crate) fn all_pairs(
    scene: Option<&str>,
    metric: &str,
    arms: &[(KernelKind, Vec<f64>)],
) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (i, (ka, a)) in arms.iter().enumerate() {
        for (kb, b) in &arms[i + 1..] {
            out.push(Comparison::between(scene, metric, (*ka, a), (*kb, b)));
        }
    }
    out
}
