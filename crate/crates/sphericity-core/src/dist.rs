//! Samplers for the five simulation scenarios and the spiked scale
//! transformation used in the size/power experiments.
//!
//! Observations are drawn as `X_i = A Y_i + mu` where `Y_i` comes from one
//! of the base scenarios and `A = diag(sqrt(2) * 1_[vp], 1_(p - [vp]))`
//! inflates the first `floor(v p)` coordinates. `v = 0` is the null
//! configuration. Sampling is a pure function of the [`ScenarioSpec`],
//! including its seed, so replications can run in any order on any number
//! of threads.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::testing::ShapeSpec;

/// The five data-generating scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// I: standard multivariate normal.
    StandardNormal,
    /// II: standard multivariate t with 4 degrees of freedom (one chi-square
    /// mixing variable per observation).
    MultivariateT4,
    /// III: two-component normal scale mixture, N(0, I) with probability
    /// kappa and N(0, 9I) otherwise.
    NormalScaleMixture,
    /// IV: factor model with i.i.d. standardized Gamma(shape 4, rate 1/2)
    /// coordinates.
    GammaFactor,
    /// V: factor model with i.i.d. standardized t_4 coordinates.
    T4Factor,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::StandardNormal,
        Scenario::MultivariateT4,
        Scenario::NormalScaleMixture,
        Scenario::GammaFactor,
        Scenario::T4Factor,
    ];

    /// Roman-numeral label used in configs and reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::StandardNormal => "I",
            Scenario::MultivariateT4 => "II",
            Scenario::NormalScaleMixture => "III",
            Scenario::GammaFactor => "IV",
            Scenario::T4Factor => "V",
        }
    }

    /// Whether the scenario is elliptical (I-III) or a factor model (IV-V).
    pub fn is_elliptical(&self) -> bool {
        matches!(
            self,
            Scenario::StandardNormal | Scenario::MultivariateT4 | Scenario::NormalScaleMixture
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Scenario::StandardNormal),
            "II" | "ii" | "2" => Ok(Scenario::MultivariateT4),
            "III" | "iii" | "3" => Ok(Scenario::NormalScaleMixture),
            "IV" | "iv" | "4" => Ok(Scenario::GammaFactor),
            "V" | "v" | "5" => Ok(Scenario::T4Factor),
            _ => Err(Error::InvalidInput("unknown scenario (expected I, II, III, IV, or V)")),
        }
    }
}

/// Full description of one simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    /// Spike fraction in [0, 1]; the first `floor(v p)` coordinates are
    /// scaled by sqrt(2).
    pub v: f64,
    /// Symmetry center, defaults to the origin. The rank statistics are
    /// translation invariant, so this only matters for data inspection.
    pub location: Option<Vec<f64>>,
    /// Mixture weight for scenario III.
    pub kappa: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, n: usize, p: usize, v: f64, seed: u64) -> Self {
        ScenarioSpec {
            scenario,
            n,
            p,
            v,
            location: None,
            kappa: 0.8,
            seed,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_location(mut self, location: Vec<f64>) -> Self {
        self.location = Some(location);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidInput("scenario needs n >= 1"));
        }
        if self.p < 1 {
            return Err(Error::InvalidInput("scenario needs p >= 1"));
        }
        if !(self.v >= 0.0 && self.v <= 1.0) {
            return Err(Error::InvalidInput("spike fraction v must be in [0, 1]"));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidInput("mixture weight kappa must be in (0, 1)"));
        }
        if let Some(loc) = &self.location {
            if loc.len() != self.p {
                return Err(Error::InvalidInput("location vector must have length p"));
            }
            if !loc.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput("location entries must be finite"));
            }
        }
        Ok(())
    }
}

/// Number of inflated coordinates, `floor(v p)`.
///
/// The product is nudged by 1e-9 before truncation so that decimal spike
/// fractions like 0.15 and 0.3, whose binary product sits one ulp below an
/// integer for some p, truncate the way the exact arithmetic would.
fn spike_count(p: usize, v: f64) -> usize {
    let m = libm::floor(v * p as f64 + 1e-9) as usize;
    m.min(p)
}

/// The diagonal of the scale transformation `A`: `floor(v p)` entries of
/// sqrt(2) followed by ones.
pub fn scale_matrix(p: usize, v: f64) -> Result<Vec<f64>> {
    if p < 1 {
        return Err(Error::InvalidInput("scale_matrix needs p >= 1"));
    }
    if !(v >= 0.0 && v <= 1.0) {
        return Err(Error::InvalidInput("spike fraction v must be in [0, 1]"));
    }
    let m = spike_count(p, v);
    let mut diag = vec![1.0f64; p];
    diag[..m].iter_mut().for_each(|d| *d = core::f64::consts::SQRT_2);
    Ok(diag)
}

/// Closed-form shape traces induced by the spiked scale at fraction `v`.
///
/// With `m = floor(v p)` and `Lambda = p * A A^T / tr(A A^T)`:
///
/// * `tr(Delta^2) = m (p - m) p / (p + m)^2`
/// * `tr(Lambda^2) = p^2 (p + 3m) / (p + m)^2`
/// * `tr(Lambda^4) = p^4 (p + 15m) / (p + m)^4`
pub fn shape_from_v(p: usize, v: f64) -> Result<ShapeSpec> {
    if p < 1 {
        return Err(Error::InvalidInput("shape_from_v needs p >= 1"));
    }
    if !(v >= 0.0 && v <= 1.0) {
        return Err(Error::InvalidInput("spike fraction v must be in [0, 1]"));
    }
    let m = spike_count(p, v) as f64;
    let pf = p as f64;
    let denom = pf + m;
    let tr_d2 = m * (pf - m) * pf / (denom * denom);
    let tr_l2 = pf * pf * (pf + 3.0 * m) / (denom * denom);
    let tr_l4 = pf * pf * pf * pf * (pf + 15.0 * m) / (denom * denom * denom * denom);
    ShapeSpec::new(p, tr_d2, tr_l2, tr_l4)
}

/// Draw the `n x p` sample described by `spec`. Deterministic given the
/// spec, bit for bit.
pub fn sample(spec: &ScenarioSpec) -> Result<SampleMatrix> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scale = scale_matrix(p, spec.v)?;
    let gamma = Gamma::new(4.0, 2.0).expect("valid Gamma parameters");

    let mut data = vec![0.0f64; n * p];
    for row in data.chunks_exact_mut(p) {
        match spec.scenario {
            Scenario::StandardNormal => {
                for y in row.iter_mut() {
                    *y = StandardNormal.sample(&mut rng);
                }
            }
            Scenario::MultivariateT4 => {
                // Y = Z / sqrt(W/4): the chi-square divisor is shared by
                // every coordinate of the observation; Z is drawn first.
                for y in row.iter_mut() {
                    *y = StandardNormal.sample(&mut rng);
                }
                let f = 2.0 / libm::sqrt(chi_squared_4(&mut rng));
                row.iter_mut().for_each(|y| *y *= f);
            }
            Scenario::NormalScaleMixture => {
                let sd = if rng.random::<f64>() < spec.kappa { 1.0 } else { 3.0 };
                for y in row.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *y = sd * z;
                }
            }
            Scenario::GammaFactor => {
                // Gamma(shape 4, rate 1/2): mean 8, variance 16
                for y in row.iter_mut() {
                    *y = (gamma.sample(&mut rng) - 8.0) / 4.0;
                }
            }
            Scenario::T4Factor => {
                // standardized t_4: variance 4/(4-2) = 2
                for y in row.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let t = z * 2.0 / libm::sqrt(chi_squared_4(&mut rng));
                    *y = t * core::f64::consts::FRAC_1_SQRT_2;
                }
            }
        }
        for (x, s) in row.iter_mut().zip(&scale) {
            *x *= s;
        }
        if let Some(loc) = &spec.location {
            for (x, c) in row.iter_mut().zip(loc) {
                *x += c;
            }
        }
    }
    SampleMatrix::new(n, p, data)
}

/// Chi-square with 4 degrees of freedom as the sum of four squared
/// standard normals.
fn chi_squared_4<R: Rng>(rng: &mut R) -> f64 {
    let mut w = 0.0f64;
    for _ in 0..4 {
        let z: f64 = StandardNormal.sample(rng);
        w += z * z;
    }
    w
}

/// Derive an independent substream seed from a master seed and a list of
/// coordinate words (cell indices, replication numbers, ...).
///
/// A SplitMix64 chain: word order matters, execution order does not, so
/// parallel replications get stable streams regardless of scheduling.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut acc = splitmix64(master ^ 0x9e37_79b9_7f4a_7c15);
    for &w in words {
        acc = splitmix64(acc ^ w);
    }
    acc
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
