//! Property tests for the sign primitives and statistics.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sphericity_core::cov::kendall_cov;
use sphericity_core::matrix::SampleMatrix;
use sphericity_core::sign::{pairwise_signs, sign_gram, spatial_sign};
use sphericity_core::testing::kendall_test;

fn gaussian_matrix(seed: u64, n: usize, p: usize) -> SampleMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * p)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    SampleMatrix::new(n, p, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sign_norm_is_zero_or_one(
        v in prop::collection::vec(-1e6f64..1e6, 1..12),
    ) {
        let s = spatial_sign(&v).unwrap();
        let norm: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antisymmetry_holds_bitwise(seed in 0u64..1000, n in 2usize..7, p in 1usize..6) {
        let x = gaussian_matrix(seed, n, p);
        let s = pairwise_signs(&x).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i == j { continue; }
                let a = s.get(i, j);
                let b = s.get(j, i);
                for (u, v) in a.iter().zip(&b) {
                    prop_assert_eq!(u.to_bits(), (-v).to_bits());
                }
            }
        }
    }

    #[test]
    fn gram_agrees_with_naive_dots(seed in 0u64..500, n in 4usize..8, p in 1usize..6) {
        let x = gaussian_matrix(seed, n, p);
        let s = pairwise_signs(&x).unwrap();
        let g = sign_gram(&s);
        for i in 0..n {
            for j in 0..n {
                if i == j { continue; }
                let uij = s.get(i, j);
                for k in 0..n {
                    for l in 0..n {
                        if k == l { continue; }
                        let ukl = s.get(k, l);
                        let naive: f64 = uij.iter().zip(&ukl).map(|(a, b)| a * b).sum();
                        prop_assert!((g.entry(i, j, k, l) - naive).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kendall_cov_trace_is_one_without_ties(seed in 0u64..500, n in 2usize..9, p in 1usize..7) {
        let x = gaussian_matrix(seed, n, p);
        let xi = kendall_cov(&x).unwrap();
        prop_assert!((xi.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kendall_statistic_never_below_minus_one(
        seed in 0u64..500, n in 4usize..9, p in 1usize..7,
    ) {
        let x = gaussian_matrix(seed, n, p);
        let r = kendall_test(&x, 0.05).unwrap();
        prop_assert!(r.statistic >= -1.0);
    }
}
