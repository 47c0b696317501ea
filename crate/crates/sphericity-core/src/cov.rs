//! Sample spatial-rank and Kendall's tau covariance matrices.
//!
//! Under sphericity both matrices are proportional to the identity, which is
//! what the SR and SK statistics exploit. They are exposed here as
//! diagnostics; the test statistics themselves never materialize them.

use alloc::vec;

use crate::error::{Error, Result};
use crate::matrix::{SampleMatrix, SquareMatrix};
use crate::sign::pairwise_signs;
use crate::special::ln_gamma;

/// Sample spatial-rank covariance `(1/n) sum_i R_i R_i^T` with spatial ranks
/// `R_i = (1/n) sum_j U(X_i - X_j)`.
///
/// Symmetric positive semidefinite with trace in `[0, 1)`.
pub fn rank_cov(x: &SampleMatrix) -> Result<SquareMatrix> {
    let signs = pairwise_signs(x)?;
    let (n, p) = (x.n(), x.p());
    let mut ranks = vec![0.0f64; n * p];
    for ((i, j), row) in signs.iter() {
        for (d, &v) in row.iter().enumerate() {
            ranks[i * p + d] += v;
            ranks[j * p + d] -= v;
        }
    }
    let scale = 1.0 / n as f64;
    ranks.iter_mut().for_each(|v| *v *= scale);

    let mut omega = SquareMatrix::zeros(p);
    for i in 0..n {
        let r = &ranks[i * p..(i + 1) * p];
        for a in 0..p {
            let ra = r[a];
            for b in a..p {
                omega.add_assign(a, b, ra * r[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = omega.get(a, b) * scale;
            omega.set(a, b, v);
            omega.set(b, a, v);
        }
    }
    Ok(omega)
}

/// Sample Kendall's tau covariance `2/(n(n-1)) sum_{i<j} U_ij U_ij^T`.
///
/// Trace equals 1 exactly when the sample is tie-free; every tied pair
/// removes `2/(n(n-1))` from the trace.
pub fn kendall_cov(x: &SampleMatrix) -> Result<SquareMatrix> {
    let signs = pairwise_signs(x)?;
    let (n, p) = (x.n(), x.p());
    let mut xi = SquareMatrix::zeros(p);
    for (_, row) in signs.iter() {
        for a in 0..p {
            let ua = row[a];
            if ua == 0.0 {
                continue;
            }
            for b in a..p {
                xi.add_assign(a, b, ua * row[b]);
            }
        }
    }
    let scale = 2.0 / (n as f64 * (n - 1) as f64);
    for a in 0..p {
        for b in a..p {
            let v = xi.get(a, b) * scale;
            xi.set(a, b, v);
            xi.set(b, a, v);
        }
    }
    Ok(xi)
}

/// The Gamma ratio `Gamma((p+1)/2)^2 / (Gamma(p/2) Gamma((p+2)/2))`.
///
/// This ratio drives the "blessing of dimension": it increases to 1, forcing
/// the spatial-rank proportionality constant to its limit 0.5, so no
/// distribution-dependent nuisance parameter survives in high dimension.
/// Evaluated through log-Gamma differences; the direct product overflows
/// near `p = 343`.
pub fn tau_f_ratio(p: usize) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidInput("tau_f_ratio needs p >= 1"));
    }
    let p = p as f64;
    let ln = |v: f64| ln_gamma(v).expect("positive argument");
    Ok(libm::exp(
        2.0 * ln((p + 1.0) / 2.0) - ln(p / 2.0) - ln((p + 2.0) / 2.0),
    ))
}
