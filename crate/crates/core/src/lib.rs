//! Nonparametric density deconvolution from repeated noisy measurements.
//!
//! Each hidden signal value is observed twice, each copy contaminated by an
//! independent additive noise whose distribution is unknown. The pipeline:
//!
//! 1. tabulate the empirical characteristic function of the pairs ([`ecf`]),
//! 2. minimize the contrast functional over polynomial candidate
//!    characteristic functions ([`criterion`], [`cf_model`], [`optimizer`]),
//! 3. truncate and Fourier-invert the fitted candidate into a density
//!    estimate, clip it at zero, and score it ([`density`]),
//! 4. adapt: data-driven tail-parameter selection, combination with an
//!    alternative estimator, and cross-validated hyperparameter choice
//!    ([`adaptation`]),
//! 5. drive it all at scale from the simulation harness ([`harness`]).

pub mod adaptation;
pub mod cf_model;
pub mod criterion;
pub mod density;
pub mod distributions;
pub mod ecf;
pub mod error;
pub mod harness;
pub mod optimizer;

pub use error::{DeconvError, Result};
pub use num_complex::Complex64;
