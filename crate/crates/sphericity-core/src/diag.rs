//! Calibration diagnostics for Monte Carlo studies of a test statistic.
//!
//! A well-calibrated statistic `T` has mean/sd ratio near zero (no bias
//! term) and sample-variance over plug-in-variance ratio near one (the
//! analytic variance is honest). Both are plotted against the dimension to
//! detect calibration decay.

use crate::error::{Error, Result};

/// Sample mean of `stats` divided by its sample standard deviation
/// (divisor `len - 1`).
pub fn mean_sd_ratio(stats: &[f64]) -> Result<f64> {
    let (mean, var) = moments(stats)?;
    if var <= 0.0 {
        return Err(Error::DegenerateInput("constant statistic sample"));
    }
    Ok(mean / libm::sqrt(var))
}

/// Sample variance of `stats` divided by the plug-in variance `sigma0_sq`.
pub fn variance_ratio(stats: &[f64], sigma0_sq: f64) -> Result<f64> {
    if !(sigma0_sq > 0.0) {
        return Err(Error::InvalidInput("plug-in variance must be positive"));
    }
    let (_, var) = moments(stats)?;
    Ok(var / sigma0_sq)
}

fn moments(stats: &[f64]) -> Result<(f64, f64)> {
    if stats.len() < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: stats.len() });
    }
    if !stats.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("statistics must be finite"));
    }
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let var = stats.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var))
}
