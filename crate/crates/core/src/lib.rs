//! Hierarchical ray sampling with quasi-L0 interpolation kernels.
//!
//! Coarse volume-rendering weights along a ray are turned into a piecewise
//! density by interpolating between knots, and fine samples are drawn from it
//! by closed-form inverse transform sampling. The guide in `book/` walks
//! through the math; this crate holds the implementation.
//!
//! ```
//! use l0_sampler::kernels::KernelKind;
//! use l0_sampler::ray_pdf::{compute_weights, maxblur, RayPdf, SampleMode};
//!
//! let t = [0.0, 0.5, 1.0, 1.5, 2.0];
//! let sigma = [0.0, 0.1, 8.0, 0.2, 0.0];
//! let coarse = compute_weights(&sigma, &t)?;
//! let pdf = RayPdf::build(&maxblur(&coarse), KernelKind::Exponential)?;
//! let batch = pdf.sample(16, SampleMode::Stratified, 42)?;
//! assert_eq!(batch.positions.len(), 16);
//! # Ok::<(), l0_sampler::Error>(())
//! ```

pub mod error;
pub mod experiments;
pub mod kernels;
pub mod metrics;
pub mod quadrature;
pub mod ray_pdf;
pub mod scenes;

pub use error::{Error, Result};
pub use kernels::{KernelKind, UnitKernel};
pub use ray_pdf::{RayPdf, RayWeights, SampleBatch, SampleMode};
pub use scenes::{CatalogScene, DensityScene};
