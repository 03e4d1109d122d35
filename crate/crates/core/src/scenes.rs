//! Analytic one-dimensional density fields used as ground truth.
//!
//! A [`DensityScene`] stands in for a trained density network along one ray.
//! Densities are closed form, transmittance is closed form (via `erf` for
//! Gaussian bumps), and the reference color is integrated adaptively.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::ray_pdf::{composite, compute_weights, RayWeights};

/// Absolute tolerance requested from the quadrature in [`DensityScene::render_reference`].
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

/// A Gaussian density bump `peak · exp(−(t − center)² / (2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub peak: f64,
}

impl Bump {
    fn density(&self, t: f64) -> f64 {
        let z = (t - self.center) / self.width;
        self.peak * (-0.5 * z * z).exp()
    }

    /// `∫_{lo}^{hi} density`.
    fn mass(&self, lo: f64, hi: f64) -> f64 {
        let scale = self.width * SQRT_2;
        let x0 = (lo - self.center) / scale;
        let x1 = (hi - self.center) / scale;
        // pick the erf/erfc form that avoids cancellation in the tails
        let diff = if x0 >= 0.0 {
            libm::erfc(x0) - libm::erfc(x1)
        } else if x1 <= 0.0 {
            libm::erfc(-x1) - libm::erfc(-x0)
        } else {
            libm::erf(x1) - libm::erf(x0)
        };
        self.peak * self.width * FRAC_PI_2.sqrt() * diff
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    GaussianBump(Bump),
    /// Constant `level` on `[entry, exit]`, zero elsewhere.
    #[serde(rename_all = "kebab-case")]
    Box { entry: f64, exit: f64, level: f64 },
    MultiSurface(Vec<Bump>),
}

/// Scalar color along the ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorProfile {
    Constant(f64),
    /// Linear from `near` at the start of the extent to `far` at its end.
    Ramp { near: f64, far: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityScene {
    pub profile: Profile,
    /// `[t_near, t_far]`
    pub extent: [f64; 2],
    pub color: ColorProfile,
}

impl DensityScene {
    pub fn new(profile: Profile, extent: [f64; 2], color: ColorProfile) -> Result<Self> {
        let scene = DensityScene {
            profile,
            extent,
            color,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Checks the invariants a deserialized scene may not satisfy.
    pub fn validate(&self) -> Result<()> {
        let [near, far] = self.extent;
        let bad = |msg: String| Err(Error::InvalidScene(msg));
        if !(near.is_finite() && far.is_finite() && near < far) {
            return bad(format!("extent [{near}, {far}] must be finite and increasing"));
        }
        let inside = |t: f64| t > near && t < far;
        let check_bump = |b: &Bump| -> Result<()> {
            if !(b.width > 0.0 && b.width.is_finite()) {
                return bad(format!("bump width {} must be positive", b.width));
            }
            if !(b.peak >= 0.0 && b.peak.is_finite()) {
                return bad(format!("bump peak {} must be non-negative", b.peak));
            }
            if !inside(b.center) {
                return bad(format!("surface {} lies outside the extent", b.center));
            }
            Ok(())
        };
        match &self.profile {
            Profile::GaussianBump(b) => check_bump(b)?,
            Profile::MultiSurface(bumps) => bumps.iter().try_for_each(check_bump)?,
            Profile::Box { entry, exit, level } => {
                if !(level.is_finite() && *level >= 0.0) {
                    return bad(format!("box level {level} must be non-negative"));
                }
                if !(entry < exit && exit.is_finite()) {
                    return bad(format!("box entry {entry} must precede exit {exit}"));
                }
                if !inside(*entry) {
                    return bad(format!("surface {entry} lies outside the extent"));
                }
            }
        }
        let colors = match self.color {
            ColorProfile::Constant(c) => [c, c],
            ColorProfile::Ramp { near, far } => [near, far],
        };
        if colors.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("color values must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn near(&self) -> f64 {
        self.extent[0]
    }

    pub fn far(&self) -> f64 {
        self.extent[1]
    }

    fn check(&self, t: f64) -> Result<()> {
        if (self.near()..=self.far()).contains(&t) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                value: t,
                lo: self.near(),
                hi: self.far(),
            })
        }
    }

    fn density_at(&self, t: f64) -> f64 {
        match &self.profile {
            Profile::GaussianBump(b) => b.density(t),
            Profile::MultiSurface(bumps) => bumps.iter().map(|b| b.density(t)).sum(),
            Profile::Box { entry, exit, level } => {
                if (*entry..=*exit).contains(&t) {
                    *level
                } else {
                    0.0
                }
            }
        }
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.density_at(t))
    }

    /// `∫_{t_near}^{t} σ(s) ds`.
    pub fn optical_depth(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.depth_at(t))
    }

    fn depth_at(&self, t: f64) -> f64 {
        let near = self.near();
        match &self.profile {
            Profile::GaussianBump(b) => b.mass(near, t),
            Profile::MultiSurface(bumps) => bumps.iter().map(|b| b.mass(near, t)).sum(),
            Profile::Box { entry, exit, level } => {
                let overlap = (t.min(*exit) - entry.max(near)).max(0.0);
                level * overlap
            }
        }
    }

    /// `T(t) = exp(−∫_{t_near}^{t} σ)`.
    pub fn transmittance(&self, t: f64) -> Result<f64> {
        Ok((-self.optical_depth(t)?).exp())
    }

    pub fn color(&self, t: f64) -> f64 {
        match self.color {
            ColorProfile::Constant(c) => c,
            ColorProfile::Ramp { near, far } => {
                let x = ((t - self.near()) / (self.far() - self.near())).clamp(0.0, 1.0);
                near + (far - near) * x
            }
        }
    }

    /// Positions of the surfaces the scene contains; empty for a transparent scene.
    pub fn surfaces(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match &self.profile {
            Profile::GaussianBump(b) if b.peak > 0.0 => vec![b.center],
            Profile::GaussianBump(_) => vec![],
            Profile::MultiSurface(bumps) => bumps
                .iter()
                .filter(|b| b.peak > 0.0)
                .map(|b| b.center)
                .collect(),
            Profile::Box { entry, level, .. } if *level > 0.0 => vec![*entry],
            Profile::Box { .. } => vec![],
        };
        out.sort_by(f64::total_cmp);
        out
    }

    /// Distance from `t` to the nearest surface, or to the extent midpoint when there is none.
    pub fn surface_distance(&self, t: f64) -> f64 {
        let surfaces = self.surfaces();
        if surfaces.is_empty() {
            return (t - 0.5 * (self.near() + self.far())).abs();
        }
        surfaces
            .iter()
            .map(|s| (t - s).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Points where the integrand changes character, for splitting quadrature.
    fn breakpoints(&self) -> Vec<f64> {
        let around = |b: &Bump| -> Vec<f64> {
            (-8..=8)
                .map(|k| b.center + f64::from(k) * b.width)
                .collect()
        };
        match &self.profile {
            Profile::GaussianBump(b) => around(b),
            Profile::MultiSurface(bumps) => bumps.iter().flat_map(around).collect(),
            Profile::Box { entry, exit, .. } => vec![*entry, *exit],
        }
    }

    /// Ground-truth color `∫ σ(t) T(t) c(t) dt` over the extent.
    pub fn render_reference(&self) -> f64 {
        quadrature::integrate_with_breaks(
            |t| self.density_at(t) * (-self.depth_at(t)).exp() * self.color(t),
            self.near(),
            self.far(),
            &self.breakpoints(),
            REFERENCE_TOLERANCE,
        )
        .value
    }

    /// Discrete color estimate from sample positions.
    ///
    /// Positions are sorted, densities are composited over the spacings between
    /// consecutive samples, and the last sample's segment runs to the far bound.
    pub fn render_with_samples(&self, positions: &[f64]) -> Result<f64> {
        if positions.len() < 2 {
            return Err(Error::TooShort {
                expected: 2,
                got: positions.len(),
            });
        }
        let mut t = positions.to_vec();
        t.sort_by(f64::total_cmp);
        let sigma = t
            .iter()
            .map(|&p| self.density(p))
            .collect::<Result<Vec<_>>>()?;
        let far = self.far();
        let deltas = t
            .windows(2)
            .map(|p| p[1] - p[0])
            .chain(std::iter::once(far - t[t.len() - 1]));
        let w = composite(&sigma, deltas);
        Ok(w.iter().zip(&t).map(|(w, &p)| w * self.color(p)).sum())
    }

    /// Uniform coarse knots spanning the extent, jittered NeRF-style within
    /// their bins when a generator is given, with exact densities turned
    /// into weights.
    pub fn coarse_stage<R: Rng + ?Sized>(
        &self,
        n_coarse: usize,
        jitter: Option<&mut R>,
    ) -> Result<RayWeights> {
        if n_coarse < 2 {
            return Err(Error::TooShort {
                expected: 2,
                got: n_coarse,
            });
        }
        let (near, far) = (self.near(), self.far());
        let step = (far - near) / (n_coarse - 1) as f64;
        let mut t: Vec<f64> = (0..n_coarse).map(|i| near + step * i as f64).collect();
        t[n_coarse - 1] = far;
        if let Some(rng) = jitter {
            let grid = t.clone();
            for (i, knot) in t.iter_mut().enumerate() {
                let lower = if i == 0 { grid[0] } else { 0.5 * (grid[i - 1] + grid[i]) };
                let upper = if i + 1 == n_coarse {
                    grid[i]
                } else {
                    0.5 * (grid[i] + grid[i + 1])
                };
                let xi: f64 = rng.random();
                *knot = lower + (upper - lower) * xi;
            }
        }
        let sigma: Vec<f64> = t.iter().map(|&p| self.density_at(p)).collect();
        compute_weights(&sigma, &t)
    }
}

/// Named scenes spanning a sharp surface, an ambiguous one, and two surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogScene {
    SharpBump,
    WideBump,
    TwoSurface,
}

impl CatalogScene {
    pub const ALL: [CatalogScene; 3] = [
        CatalogScene::SharpBump,
        CatalogScene::WideBump,
        CatalogScene::TwoSurface,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CatalogScene::SharpBump => "sharp-bump",
            CatalogScene::WideBump => "wide-bump",
            CatalogScene::TwoSurface => "two-surface",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn scene(self) -> DensityScene {
        let color = ColorProfile::Ramp {
            near: 0.2,
            far: 0.8,
        };
        let profile = match self {
            // optical depth ≈ 15, so the ray is opaque
            CatalogScene::SharpBump => Profile::GaussianBump(Bump {
                center: 2.0,
                width: 0.03,
                peak: 200.0,
            }),
            // optical depth ≈ 1.5, spread over several coarse intervals
            CatalogScene::WideBump => Profile::GaussianBump(Bump {
                center: 2.0,
                width: 0.2,
                peak: 3.0,
            }),
            CatalogScene::TwoSurface => Profile::MultiSurface(vec![
                Bump {
                    center: 1.4,
                    width: 0.04,
                    peak: 15.0,
                },
                Bump {
                    center: 2.6,
                    width: 0.04,
                    peak: 150.0,
                },
            ]),
        };
        DensityScene::new(profile, [0.0, 4.0], color).expect("catalog scenes are valid")
    }
}
