//! Simulation and estimation for processes with cyclic long memory.
//!
//! The spectral density of such a process has poles at `±s0`:
//! `f(λ) = h(λ) / |λ² − s0²|^{2α}`. This crate simulates Gegenbauer-type
//! series, computes discrete filter transforms of the samples, forms two
//! averaged statistics at growing scales, and inverts them into estimates of
//! `(s0, α)`. A Monte Carlo [`harness`] ties the pieces together.
//!
//! ```
//! use cyclomem::estimator::{forward, invert};
//!
//! let y = forward(1.27, 0.1);
//! let (s0, alpha) = invert(y).unwrap();
//! assert!((s0 - 1.27).abs() < 1e-12 && (alpha - 0.1).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod filter;
pub mod harness;
pub mod quad;
pub mod series;
pub mod simulate;
pub mod spectral;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use filter::{mexican_hat, Filter, MexicanHat};
pub use series::SampledSeries;
pub use spectral::{GegenbauerSpec, SpectralModel};

/// The guide's code blocks, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral-model.md")]
    mod spectral_model {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/estimator.md")]
    mod estimator {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
