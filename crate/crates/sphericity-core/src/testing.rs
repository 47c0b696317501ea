//! Sphericity test statistics and their sampling theory.
//!
//! The SR (Spearman's rho-type) and SK (Kendall's tau-type) statistics are
//! built from leave-out quadruple U-statistics over pairwise spatial signs:
//! every index in a summand is distinct, which removes the bias that shared
//! indices would induce when `p` is large. Both are calibrated against the
//! same analytic null standard deviation [`sigma0`]; John's classical
//! statistic is included as a fixed-p baseline without a high-dimensional
//! calibration.

use alloc::vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{SampleMatrix, SquareMatrix};
use crate::sign::{dot, pairwise_signs, sign_gram, SignGram};
use crate::special::{normal_cdf, normal_quantile, normal_sf};

/// Which statistic a [`TestResult`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Spearman's rho-type rank statistic (SR).
    Spearman,
    /// Kendall's tau-type rank statistic (SK).
    Kendall,
    /// John's trace statistic, reported uncalibrated.
    John,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spearman => "SR",
            Method::Kendall => "SK",
            Method::John => "JOHN",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SR" | "sr" | "Sr" | "spearman" => Ok(Method::Spearman),
            "SK" | "sk" | "Sk" | "kendall" => Ok(Method::Kendall),
            "JOHN" | "john" | "John" => Ok(Method::John),
            _ => Err(Error::InvalidInput("unknown method (expected sr, sk, or john)")),
        }
    }
}

/// Outcome of one test on one sample.
///
/// `sigma0`, `z`, `p_value`, and `reject` are present for SR/SK whenever the
/// null standard deviation is positive (`p >= 2`); John's statistic carries
/// the raw value only. When present, `z = statistic / sigma0` and
/// `p_value = 1 - Phi(z)` (upper tail, per the one-sided rejection rule
/// `z > z_alpha`).
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub sigma0: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub reject: Option<bool>,
    pub n: usize,
    pub p: usize,
    pub tie_count: usize,
}

/// Traces of the alternative shape `Lambda = I + Delta`, `tr(Delta) = 0`.
///
/// Carries exactly what the alternative variance and the analytic power
/// function consume: `tr(Delta^2)`, `tr(Lambda^2)`, and `tr(Lambda^4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    p: usize,
    tr_d2: f64,
    tr_l2: f64,
    tr_l4: f64,
}

impl ShapeSpec {
    /// Validates the two trace identities that any real shape satisfies:
    /// `tr(Lambda^2) = p + tr(Delta^2)` and `tr(Lambda^4) >= tr(Lambda^2)^2 / p`.
    pub fn new(p: usize, tr_d2: f64, tr_l2: f64, tr_l4: f64) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidInput("shape needs p >= 1"));
        }
        if !(tr_d2 >= 0.0 && tr_d2.is_finite() && tr_l2.is_finite() && tr_l4.is_finite()) {
            return Err(Error::InvalidInput("shape traces must be finite, tr_d2 >= 0"));
        }
        let scale = 1.0 + p as f64 + tr_d2;
        if libm::fabs(tr_l2 - (p as f64 + tr_d2)) > 1e-8 * scale {
            return Err(Error::InvalidInput("shape violates tr_l2 = p + tr_d2"));
        }
        if tr_l4 < tr_l2 * tr_l2 / p as f64 - 1e-8 * scale * scale {
            return Err(Error::InvalidInput("shape violates tr_l4 >= tr_l2^2 / p"));
        }
        Ok(ShapeSpec { p, tr_d2, tr_l2, tr_l4 })
    }

    /// The spherical null shape `Lambda = I`.
    pub fn null(p: usize) -> Result<Self> {
        ShapeSpec::new(p, 0.0, p as f64, p as f64)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn tr_d2(&self) -> f64 {
        self.tr_d2
    }

    pub fn tr_l2(&self) -> f64 {
        self.tr_l2
    }

    pub fn tr_l4(&self) -> f64 {
        self.tr_l4
    }
}

/// Null standard deviation of both SR and SK:
/// `sigma0^2 = 4(p-1) / (n(n-1)(p+2))`.
pub fn sigma0(n: usize, p: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput("sigma0 needs n >= 2"));
    }
    if p < 1 {
        return Err(Error::InvalidInput("sigma0 needs p >= 1"));
    }
    let (n, p) = (n as f64, p as f64);
    Ok(libm::sqrt(4.0 * (p - 1.0) / (n * (n - 1.0) * (p + 2.0))))
}

/// Alternative standard deviation under `Lambda = I + Delta`:
///
/// `sigma1^2 = sigma0^2
///    + n^-2 p^-2 {8 p tr(Delta^2) + 4 tr^2(Delta^2)}
///    + 8 n^-1 p^-2 {tr(Lambda^4) - p^-1 tr^2(Lambda^2)}`.
///
/// Both added terms are nonnegative, so `sigma1 >= sigma0`.
pub fn sigma1(n: usize, shape: &ShapeSpec) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput("sigma1 needs n >= 2"));
    }
    let s0 = sigma0(n, shape.p)?;
    let (nf, pf) = (n as f64, shape.p as f64);
    let spike = (8.0 * pf * shape.tr_d2 + 4.0 * shape.tr_d2 * shape.tr_d2) / (nf * nf * pf * pf);
    let excess = 8.0 * (shape.tr_l4 - shape.tr_l2 * shape.tr_l2 / pf) / (nf * pf * pf);
    // excess can round to a tiny negative for null shapes; it is >= 0 exactly
    Ok(libm::sqrt(s0 * s0 + spike + excess.max(0.0)))
}

/// Asymptotic power of the SR test (equivalently SK) at level `alpha`:
/// `beta = Phi(-(sigma0/sigma1) z_alpha + (tr(Delta^2)/p) / sigma1)`.
///
/// Equals `alpha` under the null shape, including the degenerate `p = 1`
/// case where both standard deviations vanish.
pub fn analytic_power(n: usize, shape: &ShapeSpec, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput("alpha must be in (0, 1)"));
    }
    let s0 = sigma0(n, shape.p)?;
    let s1 = sigma1(n, shape)?;
    if s1 == 0.0 {
        return Ok(alpha);
    }
    let z_alpha = normal_quantile(1.0 - alpha)?;
    Ok(normal_cdf(-(s0 / s1) * z_alpha + shape.tr_d2 / shape.p as f64 / s1))
}

/// The pair of leave-out quadruple trace estimates computed from one Gram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimates {
    /// Estimate of `tr(Omega^2)` (spatial-rank covariance squared trace).
    pub rank_sq: f64,
    /// Estimate of `tr(Xi^2)` (Kendall's tau covariance squared trace).
    pub kendall_sq: f64,
}

/// Evaluate both quadruple U-statistics from a prebuilt sign Gram matrix.
///
/// The sums run over all ordered quadruples of distinct indices. The
/// innermost sums are accumulated plainly (at most n terms of magnitude
/// <= 1), then folded into compensated outer accumulators, so the result is
/// deterministic and safely inside the 1e-10 oracle tolerance even with
/// ~800k summands.
pub fn quadruple_trace_estimates(gram: &SignGram) -> Result<TraceEstimates> {
    let n = gram.n();
    if n < 4 {
        return Err(Error::InsufficientSample { needed: 4, got: n });
    }
    let m = gram.m();
    let g = gram.as_slice();
    let nm1 = n - 1;
    let idx = |a: usize, b: usize| a * nm1 + b - usize::from(b > a);

    let mut rank_acc = Compensated::default();
    let mut kendall_acc = Compensated::default();
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let row_ij = idx(i, j) * m;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let row_kj = idx(k, j) * m;
                let mut part_rank = 0.0f64;
                let mut part_kendall = 0.0f64;
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    let s1 = g[row_ij + idx(k, l)];
                    let s2 = g[row_kj + idx(i, l)];
                    part_rank += s1 * s2;
                    part_kendall += s1 * s1;
                }
                rank_acc.add(part_rank);
                kendall_acc.add(part_kendall);
            }
        }
    }
    let count = n as f64 * (n - 1) as f64 * (n - 2) as f64 * (n - 3) as f64;
    Ok(TraceEstimates {
        rank_sq: rank_acc.total() / (2.0 * count),
        kendall_sq: kendall_acc.total() / count,
    })
}

/// Leave-out estimator of `tr(Omega^2)`. Needs `n >= 4`.
pub fn tr_rank_cov_sq_hat(x: &SampleMatrix) -> Result<f64> {
    both_trace_estimates(x).map(|t| t.rank_sq)
}

/// Leave-out estimator of `tr(Xi^2)`. Nonnegative; needs `n >= 4`.
pub fn tr_kendall_cov_sq_hat(x: &SampleMatrix) -> Result<f64> {
    both_trace_estimates(x).map(|t| t.kendall_sq)
}

fn both_trace_estimates(x: &SampleMatrix) -> Result<TraceEstimates> {
    if x.n() < 4 {
        return Err(Error::InsufficientSample { needed: 4, got: x.n() });
    }
    let signs = pairwise_signs(x)?;
    quadruple_trace_estimates(&sign_gram(&signs))
}

/// Run the SR test: statistic `4 p tr_hat(Omega^2) - 1`, one-sided upper
/// tail at level `alpha`.
pub fn spearman_test(x: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    spearman_kendall_tests(x, alpha).map(|(sr, _)| sr)
}

/// Run the SK test: statistic `p tr_hat(Xi^2) - 1`, one-sided upper tail.
pub fn kendall_test(x: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    spearman_kendall_tests(x, alpha).map(|(_, sk)| sk)
}

/// Run SR and SK together, sharing the one O(n^4 p) Gram construction.
pub fn spearman_kendall_tests(x: &SampleMatrix, alpha: f64) -> Result<(TestResult, TestResult)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput("alpha must be in (0, 1)"));
    }
    let (n, p) = (x.n(), x.p());
    if n < 4 {
        return Err(Error::InsufficientSample { needed: 4, got: n });
    }
    let signs = pairwise_signs(x)?;
    let tie_count = signs.tie_count();
    let est = quadruple_trace_estimates(&sign_gram(&signs))?;
    let s0 = sigma0(n, p)?;
    let z_alpha = normal_quantile(1.0 - alpha)?;

    let build = |method: Method, statistic: f64| {
        let (z, p_value, reject) = if s0 > 0.0 {
            let z = statistic / s0;
            (Some(z), Some(normal_sf(z)), Some(z > z_alpha))
        } else {
            // p = 1: the null law is degenerate and the z-score undefined
            (None, None, None)
        };
        TestResult {
            method,
            statistic,
            sigma0: Some(s0),
            z,
            p_value,
            reject,
            n,
            p,
            tie_count,
        }
    };

    let sr = build(Method::Spearman, 4.0 * p as f64 * est.rank_sq - 1.0);
    let sk = build(Method::Kendall, p as f64 * est.kendall_sq - 1.0);
    Ok((sr, sk))
}

/// John's statistic `Q_J = (n p^2 / 2) tr{ S/tr(S) - I/p }^2` with the
/// sample covariance `S` on the `n - 1` divisor.
///
/// Reported raw: its classical calibration is fixed-p and no
/// high-dimensional null law is provided here. The trace is evaluated as a
/// sum of squares, so `Q_J >= 0` holds exactly.
pub fn john_statistic(x: &SampleMatrix) -> Result<TestResult> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let s = sample_covariance(x);
    let tr_s = s.trace();
    if !(tr_s > 0.0) {
        return Err(Error::DegenerateInput("zero-variance data (tr(S) = 0)"));
    }
    let inv_p = 1.0 / p as f64;
    let mut q = 0.0f64;
    for a in 0..p {
        let da = s.get(a, a) / tr_s - inv_p;
        q += da * da;
        for b in (a + 1)..p {
            let off = s.get(a, b) / tr_s;
            q += 2.0 * off * off;
        }
    }
    let statistic = 0.5 * n as f64 * (p as f64) * (p as f64) * q;
    Ok(TestResult {
        method: Method::John,
        statistic,
        sigma0: None,
        z: None,
        p_value: None,
        reject: None,
        n,
        p,
        tie_count: x.duplicate_pair_count(),
    })
}

fn sample_covariance(x: &SampleMatrix) -> SquareMatrix {
    let (n, p) = (x.n(), x.p());
    let mut mean = vec![0.0f64; p];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut s = SquareMatrix::zeros(p);
    let mut centered = vec![0.0f64; p];
    for row in x.rows() {
        for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
            *c = v - m;
        }
        for a in 0..p {
            let ca = centered[a];
            for b in a..p {
                s.add_assign(a, b, ca * centered[b]);
            }
        }
    }
    let scale = 1.0 / (n - 1) as f64;
    for a in 0..p {
        for b in a..p {
            let v = s.get(a, b) * scale;
            s.set(a, b, v);
            s.set(b, a, v);
        }
    }
    s
}

/// Four-nested-loop reference for `tr_rank_cov_sq_hat`.
///
/// Recomputes every spatial sign from scratch per summand and never touches
/// the Gram machinery, so it is an independent oracle for the optimized
/// path. O(n^4 p) with a large constant; intended for n <= 14.
pub fn brute_force_tr_rank_cov_sq(x: &SampleMatrix) -> Result<f64> {
    brute_force(x, false)
}

/// Four-nested-loop reference for `tr_kendall_cov_sq_hat` (same contract).
pub fn brute_force_tr_kendall_cov_sq(x: &SampleMatrix) -> Result<f64> {
    brute_force(x, true)
}

fn brute_force(x: &SampleMatrix, kendall: bool) -> Result<f64> {
    let (n, p) = (x.n(), x.p());
    if n < 4 {
        return Err(Error::InsufficientSample { needed: 4, got: n });
    }
    let mut u_ij = vec![0.0f64; p];
    let mut u_kl = vec![0.0f64; p];
    let mut u_kj = vec![0.0f64; p];
    let mut u_il = vec![0.0f64; p];
    let mut sum = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            sign_of_difference(x, i, j, &mut u_ij);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                sign_of_difference(x, k, j, &mut u_kj);
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    sign_of_difference(x, k, l, &mut u_kl);
                    let d1 = dot(&u_ij, &u_kl);
                    if kendall {
                        sum += d1 * d1;
                    } else {
                        sign_of_difference(x, i, l, &mut u_il);
                        sum += d1 * dot(&u_kj, &u_il);
                    }
                }
            }
        }
    }
    let count = n as f64 * (n - 1) as f64 * (n - 2) as f64 * (n - 3) as f64;
    Ok(if kendall { sum / count } else { sum / (2.0 * count) })
}

fn sign_of_difference(x: &SampleMatrix, i: usize, j: usize, out: &mut [f64]) {
    let (xi, xj) = (x.row(i), x.row(j));
    let mut sum_sq = 0.0f64;
    for (o, (a, b)) in out.iter_mut().zip(xi.iter().zip(xj)) {
        *o = a - b;
        sum_sq += *o * *o;
    }
    let norm = libm::sqrt(sum_sq);
    if norm < 1e-300 {
        out.iter_mut().for_each(|v| *v = 0.0);
    } else {
        out.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if libm::fabs(self.sum) >= libm::fabs(v) {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn total(&self) -> f64 {
        self.sum + self.c
    }
}
