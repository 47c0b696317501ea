//! High-dimensional rank tests for sphericity of elliptical data.
//!
//! The crate provides the building blocks for two "large p, small n"
//! sphericity tests built on spatial signs: the Spearman's rho-type SR test
//! and the Kendall's tau-type SK test. Both compare a leave-out U-statistic
//! estimate of the squared trace of a sign/rank covariance matrix against
//! its value under H0: Sigma = sigma * I, and are calibrated by a fully
//! analytic null standard deviation — no nuisance parameters and no
//! location estimate, so the dimension may exceed the sample size by any
//! margin.
//!
//! Layout:
//!
//! * [`matrix`]   — data matrices and small dense symmetric matrices
//! * [`sign`]     — spatial signs, pairwise sign sets, the sign Gram matrix
//! * [`cov`]      — spatial-rank / Kendall's tau covariance matrices and the
//!   Gamma-ratio diagnostic behind the "blessing of dimension"
//! * [`testing`]  — leave-out trace estimators, the SR/SK/John statistics,
//!   null and alternative variances, analytic power, brute-force oracles
//! * [`dist`]     — samplers for the five simulation scenarios and the
//!   spiked diagonal scale transformation
//! * [`diag`]     — mean/sd and variance-ratio diagnostics for Monte Carlo
//!   calibration studies
//! * [`special`]  — normal CDF/quantile and log-Gamma helpers
//!
//! The crate is `no_std` (with `alloc`); all operations are pure functions
//! of their inputs and safe to call concurrently.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cov;
pub mod diag;
pub mod dist;
pub mod error;
pub mod matrix;
pub mod sign;
pub mod special;
pub mod testing;

pub use error::{Error, Result};
pub use matrix::{SampleMatrix, SquareMatrix};
pub use sign::{PairwiseSignSet, SignGram};
pub use testing::{Method, TestResult};
