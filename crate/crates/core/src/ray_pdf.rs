//! Piecewise densities along a single ray and fine-sample generation.
//!
//! The pipeline for one ray is:
//!
//! 1. [`compute_weights`] turns coarse densities into alpha-composited weights.
//! 2. [`maxblur`] widens peaks and adds a `0.01` floor.
//! 3. [`RayPdf::build`] reconstructs `w(t)` between knots with a [`KernelKind`]
//!    and accumulates per-interval masses.
//! 4. [`RayPdf::sample`] draws fine samples by inverse transform sampling.
//!
//! [`resample`] chains steps 2–4 and handles rays that carry no weight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelKind, UnitKernel};

/// Interval length used for the last knot, which has no successor.
pub const LAST_INTERVAL_SENTINEL: f64 = 1e10;

/// Constant added by [`maxblur`] to every weight.
pub const MAXBLUR_FLOOR: f64 = 0.01;

/// Knot positions along a ray with their non-negative weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayWeights {
    t: Vec<f64>,
    w: Vec<f64>,
}

impl RayWeights {
    pub fn new(t: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        check_knots(&t)?;
        if w.len() != t.len() {
            return Err(Error::LengthMismatch {
                knots: t.len(),
                values: w.len(),
            });
        }
        if let Some(&value) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidWeight {
                name: "w",
                value,
            });
        }
        Ok(RayWeights { t, w })
    }

    pub fn knots(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// True when every weight is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|&w| w == 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }
}

fn check_knots(t: &[f64]) -> Result<()> {
    if t.len() < 2 {
        return Err(Error::TooShort {
            expected: 2,
            got: t.len(),
        });
    }
    if let Some(i) = t.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonMonotoneKnots(i));
    }
    if let Some(i) = t.windows(2).position(|p| p[1] <= p[0]) {
        return Err(Error::NonMonotoneKnots(i + 1));
    }
    Ok(())
}

/// Alpha-composites densities over the given interval lengths.
///
/// `w_i = α_i Π_{j<i} (1 − α_j)` with `α_i = 1 − exp(−σ_i δ_i)`.
pub(crate) fn composite(sigma: &[f64], deltas: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut transmittance = 1.0;
    sigma
        .iter()
        .zip(deltas)
        .map(|(&s, d)| {
            let optical_depth = s * d;
            let alpha = -(-optical_depth).exp_m1();
            let w = alpha * transmittance;
            transmittance *= (-optical_depth).exp();
            w
        })
        .collect()
}

/// Volume-rendering weights from per-knot densities.
///
/// The last knot uses [`LAST_INTERVAL_SENTINEL`] as its interval length, so any
/// positive density there absorbs the remaining transmittance.
pub fn compute_weights(sigma: &[f64], t: &[f64]) -> Result<RayWeights> {
    check_knots(t)?;
    if sigma.len() != t.len() {
        return Err(Error::LengthMismatch {
            knots: t.len(),
            values: sigma.len(),
        });
    }
    if let Some((index, &value)) = sigma
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(Error::InvalidDensity { index, value });
    }
    let deltas = t
        .windows(2)
        .map(|p| p[1] - p[0])
        .chain(std::iter::once(LAST_INTERVAL_SENTINEL));
    let w = composite(sigma, deltas);
    Ok(RayWeights { t: t.to_vec(), w })
}

/// `w′_i = ½(max(w_{i−1}, w_i) + max(w_i, w_{i+1})) + 0.01`, zero-padded at both ends.
pub fn maxblur(weights: &RayWeights) -> RayWeights {
    let w = &weights.w;
    let n = w.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= n {
            0.0
        } else {
            w[i as usize]
        }
    };
    let blurred = (0..n as isize)
        .map(|i| 0.5 * (at(i - 1).max(at(i)) + at(i).max(at(i + 1))) + MAXBLUR_FLOOR)
        .collect();
    RayWeights {
        t: weights.t.clone(),
        w: blurred,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// One uniform draw per equal slice of the CDF.
    Stratified,
    /// Independent uniform draws.
    Independent,
}

/// Sorted fine-sample positions drawn from a [`RayPdf`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub positions: Vec<f64>,
    pub mode: SampleMode,
    /// Seed the batch was drawn with, when drawn through [`RayPdf::sample`].
    pub seed: Option<u64>,
    /// Set when the ray carried no weight and samples are uniform over its extent.
    pub fallback: bool,
}

/// Piecewise density assembled from ray weights and a kernel kind.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPdf {
    kind: KernelKind,
    knots: Vec<f64>,
    kernels: Vec<UnitKernel>,
    /// `∫₀¹ ŵ` per interval, before the length factor.
    unit_mass: Vec<f64>,
    interval_mass: Vec<f64>,
    cum_mass: Vec<f64>,
    total_mass: f64,
    empty: bool,
}

impl RayPdf {
    /// Builds the piecewise density.
    ///
    /// Interval `i` carries mass `(t_{i+1} − t_i) · ∫₀¹ ŵ_i`. For
    /// [`KernelKind::ArgmaxDelta`] the interval to the right of the first
    /// maximal knot (left of it, for the last knot) carries mass 1 and every
    /// other interval carries none.
    pub fn build(weights: &RayWeights, kind: KernelKind) -> Result<Self> {
        let t = &weights.t;
        let w = &weights.w;
        if t[t.len() - 1] - t[0] <= 0.0 {
            return Err(Error::DegenerateRay);
        }
        let intervals = t.len() - 1;
        let (kernels, unit_mass, interval_mass) = if kind == KernelKind::ArgmaxDelta {
            let peak = w
                .iter()
                .enumerate()
                .fold(0, |best, (i, &v)| if v > w[best] { i } else { best });
            let target = peak.min(intervals - 1);
            let mass: Vec<f64> = (0..intervals)
                .map(|i| if i == target { 1.0 } else { 0.0 })
                .collect();
            (Vec::new(), mass.clone(), mass)
        } else {
            let kernels = w
                .windows(2)
                .map(|p| UnitKernel::new(kind, p[0], p[1]))
                .collect::<Result<Vec<_>>>()?;
            let unit = kernels
                .iter()
                .map(|k| k.integral())
                .collect::<Result<Vec<_>>>()?;
            let mass = unit
                .iter()
                .zip(t.windows(2))
                .map(|(m, p)| (p[1] - p[0]) * m)
                .collect();
            (kernels, unit, mass)
        };
        let mut cum_mass = Vec::with_capacity(t.len());
        cum_mass.push(0.0);
        let mut acc = 0.0;
        for m in &interval_mass {
            acc += m;
            cum_mass.push(acc);
        }
        Ok(RayPdf {
            kind,
            knots: t.clone(),
            kernels,
            unit_mass,
            interval_mass,
            cum_mass,
            total_mass: acc,
            empty: weights.is_zero(),
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn interval_mass(&self) -> &[f64] {
        &self.interval_mass
    }

    pub fn cum_mass(&self) -> &[f64] {
        &self.cum_mass
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `true` when the input weights were all zero or no mass was assembled.
    pub fn is_empty(&self) -> bool {
        self.empty || self.total_mass <= 0.0
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Index of the interval containing `t`; the last interval is closed.
    pub fn interval_of(&self, t: f64) -> usize {
        let n = self.knots.len();
        self.knots.partition_point(|&k| k <= t).clamp(1, n - 1) - 1
    }

    fn unit_fraction(&self, i: usize, residual: f64) -> f64 {
        if self.kind == KernelKind::ArgmaxDelta {
            return (residual / self.interval_mass[i]).clamp(0.0, 1.0);
        }
        let delta = self.knots[i + 1] - self.knots[i];
        let unit_residual = (residual / delta).clamp(0.0, self.unit_mass[i]);
        self.kernels[i]
            .icdf(unit_residual)
            .expect("residual clamped to the interval mass")
    }

    /// Position whose normalized CDF equals `u ∈ [0, 1]`.
    pub fn invert(&self, u: f64) -> f64 {
        let r = u.clamp(0.0, 1.0) * self.total_mass;
        let last = self.interval_mass.len() - 1;
        let i = (self.cum_mass[1..].partition_point(|&c| c <= r)).min(last);
        let x = self.unit_fraction(i, r - self.cum_mass[i]);
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        (lo + x * (hi - lo)).min(hi)
    }

    /// Normalized CDF at position `t`; 0 before the first knot and 1 after the last.
    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.extent();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let i = self.interval_of(t);
        let delta = self.knots[i + 1] - self.knots[i];
        let x = ((t - self.knots[i]) / delta).clamp(0.0, 1.0);
        let partial = if self.kind == KernelKind::ArgmaxDelta {
            self.interval_mass[i] * x
        } else {
            delta
                * self.kernels[i]
                    .partial_integral(x)
                    .expect("fraction clamped to [0, 1]")
        };
        ((self.cum_mass[i] + partial) / self.total_mass).min(1.0)
    }

    /// Normalized density at `t` inside the ray extent.
    pub fn density(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.extent();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { value: t, lo, hi });
        }
        let i = self.interval_of(t);
        let delta = self.knots[i + 1] - self.knots[i];
        let value = if self.kind == KernelKind::ArgmaxDelta {
            self.interval_mass[i] / delta
        } else {
            let x = ((t - self.knots[i]) / delta).clamp(0.0, 1.0);
            self.kernels[i].eval(x)?
        };
        Ok(value / self.total_mass)
    }

    /// Draws `count` sorted samples using a caller-provided generator.
    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        count: usize,
        mode: SampleMode,
        rng: &mut R,
    ) -> Result<SampleBatch> {
        if count == 0 {
            return Err(Error::EmptyBatch);
        }
        let uniforms = draw_uniforms(count, mode, rng);
        let fallback = self.is_empty();
        let mut positions: Vec<f64> = if fallback {
            let (lo, hi) = self.extent();
            uniforms.iter().map(|u| lo + u * (hi - lo)).collect()
        } else {
            uniforms.iter().map(|&u| self.invert(u)).collect()
        };
        positions.sort_by(f64::total_cmp);
        Ok(SampleBatch {
            positions,
            mode,
            seed: None,
            fallback,
        })
    }

    /// Draws `count` sorted samples from a seeded ChaCha8 stream.
    pub fn sample(&self, count: usize, mode: SampleMode, seed: u64) -> Result<SampleBatch> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut batch = self.sample_with(count, mode, &mut rng)?;
        batch.seed = Some(seed);
        Ok(batch)
    }
}

/// Uniform variates in `[0, 1)`; stratified draws come out ascending.
pub fn draw_uniforms<R: Rng + ?Sized>(count: usize, mode: SampleMode, rng: &mut R) -> Vec<f64> {
    let n = count as f64;
    (0..count)
        .map(|k| {
            let xi: f64 = rng.random();
            match mode {
                SampleMode::Stratified => (k as f64 + xi) / n,
                SampleMode::Independent => xi,
            }
        })
        .collect()
}

/// Fine samples for one ray from its coarse weights.
///
/// A ray whose coarse weights are all zero is sampled uniformly and the batch
/// is flagged, before maxblur would otherwise hide the missing signal.
pub fn resample<R: Rng + ?Sized>(
    coarse: &RayWeights,
    kind: KernelKind,
    use_maxblur: bool,
    count: usize,
    mode: SampleMode,
    rng: &mut R,
) -> Result<(RayPdf, SampleBatch)> {
    let weights = if use_maxblur && !coarse.is_zero() {
        maxblur(coarse)
    } else {
        coarse.clone()
    };
    let pdf = RayPdf::build(&weights, kind)?;
    let batch = pdf.sample_with(count, mode, rng)?;
    Ok((pdf, batch))
}
