//! Pivotal, self-normalized inference for distance covariance and distance
//! correlation on dependent, metric-space-valued paired samples.
//!
//! The crate tests *relevant* hypotheses of the form `dcor(X, Y) <= delta`
//! (and the reversed equivalence form `dcor(X, Y) >= delta`) without
//! estimating any long-run variance: the test statistic is normalized by a
//! functional of the sequential trajectory of the estimator itself, so its
//! limit law is pivotal and critical values come from a reusable Monte Carlo
//! quantile table.
//!
//! Layout:
//! - [`metric`]: supported metric spaces and validated paired samples.
//! - [`dcov`]: batch distance covariance / correlation estimators plus a
//!   brute-force V-statistic cross-check.
//! - [`sequential`]: streaming prefix trajectories and the self-normalizers.
//! - [`pivotal`]: Monte Carlo simulation of the pivotal ratio and quantile
//!   tables.
//! - [`inference`]: the decision procedures built on top.
//! - [`simlab`]: data generators and experiment drivers for calibration
//!   studies.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the
//! command-line front end live in the companion `relcor` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dcov;
pub mod inference;
pub mod metric;
pub mod pivotal;
pub mod sequential;
pub mod simlab;

mod error;
mod numeric;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
