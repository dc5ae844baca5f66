//! Streaming sparse-parameter identification for multivariate ARMAX systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`armax_model`] describes systems, simulates trajectories and builds regressors.
//! * [`noise_estimator`] produces *a posteriori* estimates of colored system noise with
//!   an over-parameterized recursive least squares fit.
//! * [`identifier`] runs the recursive alternating-minimization estimator that tracks a
//!   dense value estimate and a soft-thresholded sparse estimate side by side.
//! * [`baselines`] provides RLS, OAM, LSW and SINDy behind a common [`baselines::Estimator`]
//!   trait.
//! * [`benchmark`] is the Monte Carlo harness computing PEE, CR and CT curves.

pub mod armax_model;
pub mod baselines;
pub mod benchmark;
pub mod error;
pub mod identifier;
pub mod linalg;
pub mod noise_estimator;

pub use error::{Error, Result};
