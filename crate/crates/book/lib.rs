//! Code listings from the guide in `book/src`, compiled as doc-tests.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../book/src/kernels.md")]
pub mod kernels {}

#[doc = include_str!("../../book/src/ray-pdf.md")]
pub mod ray_pdf {}

#[doc = include_str!("../../book/src/scenes.md")]
pub mod scenes {}

#[doc = include_str!("../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../book/src/experiments.md")]
pub mod experiments {}
