//! Spatial signs of pairwise differences and their Gram matrix.
//!
//! The spatial sign of a vector is its direction, `U(x) = x / ||x||`, with
//! `U(0) = 0`. Every test statistic in this crate is a function of the
//! pairwise signs `U(X_i - X_j)` alone, which is what makes the statistics
//! invariant under rotation, scaling, and translation of the data.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

/// Norm below which a difference vector is treated as an exact tie.
///
/// Denormal norms would otherwise divide to Inf.
const TIE_NORM_THRESHOLD: f64 = 1e-300;

/// Spatial sign `U(x) = x / ||x||`, or the zero vector when `x = 0`.
///
/// The norm is computed with max-abs scaling so that extreme entries can
/// neither overflow nor underflow the intermediate sum of squares.
pub fn spatial_sign(x: &[f64]) -> Result<Vec<f64>> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("spatial sign needs finite entries"));
    }
    let mut out = x.to_vec();
    normalize_in_place(&mut out);
    Ok(out)
}

/// In-place normalization; returns true when the vector was a tie (zeroed).
fn normalize_in_place(x: &mut [f64]) -> bool {
    let mut max_abs = 0.0f64;
    for &v in x.iter() {
        let a = libm::fabs(v);
        if a > max_abs {
            max_abs = a;
        }
    }
    if max_abs == 0.0 {
        return true;
    }
    let mut sum_sq = 0.0f64;
    for &v in x.iter() {
        let s = v / max_abs;
        sum_sq += s * s;
    }
    let norm = max_abs * libm::sqrt(sum_sq);
    if norm < TIE_NORM_THRESHOLD {
        x.iter_mut().for_each(|v| *v = 0.0);
        return true;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    false
}

/// The spatial signs `U(X_i - X_j)` for all unordered pairs `i < j`.
///
/// Only the `i < j` signs are stored; a query for `(j, i)` returns the exact
/// (bit-level) negation, and `(i, i)` returns the zero vector. Tied pairs
/// (`X_i = X_j`) store the zero vector and are counted in [`tie_count`].
///
/// [`tie_count`]: PairwiseSignSet::tie_count
#[derive(Debug, Clone)]
pub struct PairwiseSignSet {
    signs: Vec<f64>, // n(n-1)/2 rows of length p, pair (i,j) i<j in lex order
    ties: Vec<bool>,
    n: usize,
    p: usize,
}

/// Compute the pairwise spatial signs of a sample. Needs `n >= 2`.
pub fn pairwise_signs(x: &SampleMatrix) -> Result<PairwiseSignSet> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let pairs = n * (n - 1) / 2;
    let mut signs = vec![0.0f64; pairs * p];
    let mut ties = vec![false; pairs];
    let mut r = 0;
    for i in 0..n {
        let xi = x.row(i);
        for j in (i + 1)..n {
            let xj = x.row(j);
            let row = &mut signs[r * p..(r + 1) * p];
            for ((d, a), b) in row.iter_mut().zip(xi).zip(xj) {
                *d = a - b;
            }
            ties[r] = normalize_in_place(row);
            r += 1;
        }
    }
    Ok(PairwiseSignSet { signs, ties, n, p })
}

impl PairwiseSignSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of tied pairs (`X_i = X_j` with `i < j`).
    pub fn tie_count(&self) -> usize {
        self.ties.iter().filter(|&&t| t).count()
    }

    /// Whether the pair `(i, j)`, `i != j`, is tied.
    pub fn is_tie(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.ties[self.pair_rank(a, b)]
    }

    /// Lexicographic rank of the stored pair `(i, j)` with `i < j`.
    #[inline]
    fn pair_rank(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// The stored unit (or zero) vector for `i < j`.
    #[inline]
    pub fn stored(&self, i: usize, j: usize) -> &[f64] {
        let r = self.pair_rank(i, j);
        &self.signs[r * self.p..(r + 1) * self.p]
    }

    /// `U(X_i - X_j)` for any `i, j`, honoring antisymmetry exactly.
    ///
    /// Negation flips the IEEE sign bit, so `get(j, i)` is the bit-level
    /// negation of `get(i, j)`. Panics if an index is out of range.
    pub fn get(&self, i: usize, j: usize) -> Vec<f64> {
        assert!(i < self.n && j < self.n, "pair index out of range");
        if i == j {
            return vec![0.0; self.p];
        }
        if i < j {
            self.stored(i, j).to_vec()
        } else {
            self.stored(j, i).iter().map(|v| -v).collect()
        }
    }

    /// Iterate over stored pairs `((i, j), sign)` with `i < j`.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        let n = self.n;
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .zip(self.signs.chunks_exact(self.p))
    }
}

/// Gram matrix of all `m = n(n-1)` ordered pairwise signs.
///
/// `entry((i,j), (k,l)) = U_ij . U_kl`. Building it costs one O(n^4 p)
/// pass over the data; after that both quadruple U-statistics reduce to
/// O(n^4) scalar work, which is what keeps the whole test at the O(n^4 p)
/// budget.
#[derive(Debug, Clone)]
pub struct SignGram {
    data: Vec<f64>, // m x m row-major over ordered pair indices
    n: usize,
    m: usize,
}

/// Materialize the ordered-pair Gram matrix from a sign set.
pub fn sign_gram(signs: &PairwiseSignSet) -> SignGram {
    let n = signs.n();
    let m = n * (n - 1);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut data = vec![0.0f64; m * m];
    let ord = |i: usize, j: usize| ordered_pair_index(n, i, j);
    for (a, &(i, j)) in pairs.iter().enumerate() {
        let ra = signs.stored(i, j);
        for &(k, l) in pairs.iter().take(a + 1) {
            let rb = signs.stored(k, l);
            let v = dot(ra, rb);
            let (ij, ji) = (ord(i, j), ord(j, i));
            let (kl, lk) = (ord(k, l), ord(l, k));
            data[ij * m + kl] = v;
            data[ji * m + kl] = -v;
            data[ij * m + lk] = -v;
            data[ji * m + lk] = v;
            data[kl * m + ij] = v;
            data[kl * m + ji] = -v;
            data[lk * m + ij] = -v;
            data[lk * m + ji] = v;
        }
    }
    SignGram { data, n, m }
}

impl SignGram {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of ordered pairs, `n(n-1)`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Row/column index of the ordered pair `(i, j)`, `i != j`.
    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        ordered_pair_index(self.n, i, j)
    }

    /// `U_ij . U_kl`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.pair_index(i, j) * self.m + self.pair_index(k, l)]
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[inline]
fn ordered_pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + j - usize::from(j > i)
}

/// Unrolled dot product with eight independent accumulators.
///
/// The fixed lane structure keeps the summation order deterministic while
/// letting the compiler vectorize; a single serial accumulator would chain
/// every add through one dependency.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let len = a.len().min(b.len());
    let main = len - len % LANES;
    let mut acc = [0.0f64; LANES];
    for (ca, cb) in a[..main].chunks_exact(LANES).zip(b[..main].chunks_exact(LANES)) {
        for k in 0..LANES {
            acc[k] += ca[k] * cb[k];
        }
    }
    let mut tail = 0.0f64;
    for (x, y) in a[main..len].iter().zip(&b[main..len]) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_matrix(seed: u64, n: usize, p: usize) -> SampleMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * p)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        SampleMatrix::new(n, p, data).unwrap()
    }

    #[test]
    fn sign_of_a_3_4_vector() {
        let s = spatial_sign(&[3.0, 4.0]).unwrap();
        assert!((s[0] - 0.6).abs() < 1e-15 && (s[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(spatial_sign(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn sign_in_one_dimension_is_the_sign_function() {
        assert_eq!(spatial_sign(&[-2.0]).unwrap(), vec![-1.0]);
    }

    #[test]
    fn sign_rejects_non_finite() {
        assert!(spatial_sign(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn sign_survives_extreme_magnitudes() {
        // naive sum of squares would overflow here
        let s = spatial_sign(&[3e300, 4e300]).unwrap();
        assert!((s[0] - 0.6).abs() < 1e-15 && (s[1] - 0.8).abs() < 1e-15);
        let t = spatial_sign(&[3e-295, 4e-295]).unwrap();
        assert!((t[0] - 0.6).abs() < 1e-12 && (t[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sub_threshold_norms_are_ties() {
        // norm 5e-305 sits below the 1e-300 tie threshold
        assert_eq!(spatial_sign(&[3e-305, 4e-305]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn pairwise_needs_two_rows() {
        let x = SampleMatrix::new(1, 2, vec![0.0, 0.0]).unwrap();
        match pairwise_signs(&x) {
            Err(Error::InsufficientSample { needed: 2, got: 1 }) => {}
            other => panic!("expected insufficient-sample error, got {other:?}"),
        }
    }

    #[test]
    fn two_point_sample_in_one_dimension() {
        let x = SampleMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        let s = pairwise_signs(&x).unwrap();
        assert_eq!(s.get(0, 1), vec![-1.0]);
        assert_eq!(s.get(1, 0), vec![1.0]);
        assert_eq!(s.get(0, 0), vec![0.0]);
        assert_eq!(s.tie_count(), 0);
    }

    #[test]
    fn tied_rows_store_the_zero_vector() {
        let x = SampleMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let s = pairwise_signs(&x).unwrap();
        assert_eq!(s.get(0, 1), vec![0.0, 0.0]);
        assert_eq!(s.tie_count(), 1);
        assert!(s.is_tie(1, 0));
    }

    #[test]
    fn signs_match_independent_recomputation() {
        let x = gaussian_matrix(7, 5, 3);
        let s = pairwise_signs(&x).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let diff: Vec<f64> = x
                    .row(i)
                    .iter()
                    .zip(x.row(j))
                    .map(|(a, b)| a - b)
                    .collect();
                let expect = spatial_sign(&diff).unwrap();
                assert_eq!(s.get(i, j), expect, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn antisymmetry_is_bit_exact() {
        let x = gaussian_matrix(11, 6, 4);
        let s = pairwise_signs(&x).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let a = s.get(i, j);
                let b = s.get(j, i);
                for (u, v) in a.iter().zip(&b) {
                    assert_eq!(u.to_bits(), (-v).to_bits());
                }
            }
        }
    }

    #[test]
    fn stored_norms_are_zero_or_one() {
        let x = gaussian_matrix(3, 8, 5);
        let s = pairwise_signs(&x).unwrap();
        for (_, row) in s.iter() {
            let norm = libm::sqrt(dot(row, row));
            assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_diagonal_and_antisymmetry() {
        let x = gaussian_matrix(5, 6, 4);
        let g = sign_gram(&pairwise_signs(&x).unwrap());
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                assert!((g.entry(i, j, i, j) - 1.0).abs() < 1e-12);
                assert!((g.entry(i, j, j, i) + 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_matches_naive_dot_products() {
        let x = gaussian_matrix(17, 6, 4);
        let s = pairwise_signs(&x).unwrap();
        let g = sign_gram(&s);
        assert_eq!(g.m(), 30);
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let uij = s.get(i, j);
                for k in 0..6 {
                    for l in 0..6 {
                        if k == l {
                            continue;
                        }
                        let ukl = s.get(k, l);
                        let naive: f64 = uij.iter().zip(&ukl).map(|(a, b)| a * b).sum();
                        assert!(
                            (g.entry(i, j, k, l) - naive).abs() < 1e-12,
                            "entry ({i},{j}),({k},{l})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gram_diagonal_is_zero_for_tied_pairs() {
        let x = SampleMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 2.0],
        ])
        .unwrap();
        let g = sign_gram(&pairwise_signs(&x).unwrap());
        assert_eq!(g.entry(0, 1, 0, 1), 0.0);
        assert!((g.entry(0, 2, 0, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_equivariance() {
        // rotate by a fixed 2d rotation; signs must rotate along
        let theta: f64 = 0.7;
        let (c, s) = (theta.cos(), theta.sin());
        let x = gaussian_matrix(23, 5, 2);
        let rotated: Vec<Vec<f64>> = x
            .rows()
            .map(|r| vec![c * r[0] - s * r[1], s * r[0] + c * r[1]])
            .collect();
        let xr = SampleMatrix::from_rows(&rotated).unwrap();
        let su = pairwise_signs(&x).unwrap();
        let sr = pairwise_signs(&xr).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let u = su.get(i, j);
                let v = sr.get(i, j);
                assert!((v[0] - (c * u[0] - s * u[1])).abs() < 1e-10);
                assert!((v[1] - (s * u[0] + c * u[1])).abs() < 1e-10);
            }
        }
    }
}
