//! Testing for heteroskedasticity in fixed-design nonparametric regression.
//!
//! Modules:
//! - [`sim_model`]: mean/variance catalog, noise laws and sampling.
//! - [`kernel`]: boundary-deleted renormalized discrete kernels.
//! - [`statistics`]: difference statistics, oracle proxies, baselines.
//! - [`testing`]: separation rates, calibration and decisions.
//! - [`lowerbound`]: prior constructions, marginal checks, χ² machinery.
//! - [`numerics`]: quadrature, sequences, convolution checks.
//! - [`harness`]: experiment configuration and runners.

pub mod error;
pub mod harness;
pub mod kernel;
pub mod lowerbound;
pub mod numerics;
pub mod rng;
pub mod sim_model;
pub mod statistics;
pub mod testing;

pub use error::{Error, Result};
