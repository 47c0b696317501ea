//! Oracle and invariance tests for the quadruple estimators.
//!
//! The optimized Gram-backed estimators are checked against the
//! brute-force four-loop references on seeded draws, and the statistics are
//! checked for the symmetries they are supposed to have exactly:
//! permutation of observations and similarity transforms `a O x + c`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sphericity_core::dist::{sample, Scenario, ScenarioSpec};
use sphericity_core::matrix::SampleMatrix;
use sphericity_core::testing::{
    brute_force_tr_kendall_cov_sq, brute_force_tr_rank_cov_sq, spearman_kendall_tests,
    tr_kendall_cov_sq_hat, tr_rank_cov_sq_hat,
};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-30)
}

#[test]
fn estimators_match_brute_force_across_sizes() {
    let mut seed = 100;
    for &n in &[8usize, 10, 12] {
        for &p in &[5usize, 50] {
            for scenario in [Scenario::StandardNormal, Scenario::MultivariateT4] {
                seed += 1;
                let x = sample(&ScenarioSpec::new(scenario, n, p, 0.0, seed)).unwrap();
                let fast_rank = tr_rank_cov_sq_hat(&x).unwrap();
                let slow_rank = brute_force_tr_rank_cov_sq(&x).unwrap();
                assert!(
                    rel_err(fast_rank, slow_rank) < 1e-10,
                    "rank n={n} p={p} {scenario}: {fast_rank} vs {slow_rank}"
                );
                let fast_kendall = tr_kendall_cov_sq_hat(&x).unwrap();
                let slow_kendall = brute_force_tr_kendall_cov_sq(&x).unwrap();
                assert!(
                    rel_err(fast_kendall, slow_kendall) < 1e-10,
                    "kendall n={n} p={p} {scenario}: {fast_kendall} vs {slow_kendall}"
                );
            }
        }
    }
}

#[test]
fn brute_force_is_permutation_invariant() {
    let x = sample(&ScenarioSpec::new(Scenario::StandardNormal, 8, 6, 0.0, 500)).unwrap();
    let reversed: Vec<Vec<f64>> = x.rows().rev().map(|r| r.to_vec()).collect();
    let y = SampleMatrix::from_rows(&reversed).unwrap();
    let a = brute_force_tr_rank_cov_sq(&x).unwrap();
    let b = brute_force_tr_rank_cov_sq(&y).unwrap();
    assert!(rel_err(a, b) < 1e-12);
    let a = brute_force_tr_kendall_cov_sq(&x).unwrap();
    let b = brute_force_tr_kendall_cov_sq(&y).unwrap();
    assert!(rel_err(a, b) < 1e-12);
}

#[test]
fn statistics_are_permutation_invariant() {
    let x = sample(&ScenarioSpec::new(Scenario::NormalScaleMixture, 10, 12, 0.15, 321)).unwrap();
    let mut rows: Vec<Vec<f64>> = x.rows().map(|r| r.to_vec()).collect();
    rows.swap(0, 7);
    rows.swap(3, 9);
    rows.reverse();
    let y = SampleMatrix::from_rows(&rows).unwrap();
    let (sr_x, sk_x) = spearman_kendall_tests(&x, 0.05).unwrap();
    let (sr_y, sk_y) = spearman_kendall_tests(&y, 0.05).unwrap();
    assert!(rel_err(sr_x.statistic, sr_y.statistic) < 1e-12);
    assert!(rel_err(sk_x.statistic, sk_y.statistic) < 1e-12);
}

/// Random orthogonal matrix from twice-iterated Gram-Schmidt on a
/// Gaussian draw.
fn random_orthogonal(rng: &mut ChaCha8Rng, p: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..p).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    for _pass in 0..2 {
        for i in 0..p {
            for j in 0..i {
                let proj: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                for d in 0..p {
                    basis[i][d] -= proj * basis[j][d];
                }
            }
            let norm: f64 = basis[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            basis[i].iter_mut().for_each(|a| *a /= norm);
        }
    }
    basis
}

fn similarity_transform(x: &SampleMatrix, a: f64, o: &[Vec<f64>], c: &[f64]) -> SampleMatrix {
    let p = x.p();
    let rows: Vec<Vec<f64>> = x
        .rows()
        .map(|row| {
            (0..p)
                .map(|out| {
                    let rotated: f64 = o[out].iter().zip(row).map(|(w, v)| w * v).sum();
                    a * rotated + c[out]
                })
                .collect()
        })
        .collect();
    SampleMatrix::from_rows(&rows).unwrap()
}

#[test]
fn statistics_are_similarity_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    for seed in 0..3u64 {
        let x = sample(&ScenarioSpec::new(Scenario::StandardNormal, 15, 40, 0.0, 9000 + seed))
            .unwrap();
        let (sr_x, sk_x) = spearman_kendall_tests(&x, 0.05).unwrap();
        for _ in 0..2 {
            let a = f64::exp(rng.random::<f64>() * 3.0 - 1.0);
            let o = random_orthogonal(&mut rng, 40);
            let c: Vec<f64> = (0..40)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    5.0 * z
                })
                .collect();
            let z = similarity_transform(&x, a, &o, &c);
            let (sr_z, sk_z) = spearman_kendall_tests(&z, 0.05).unwrap();
            assert!(
                rel_err(sr_z.statistic, sr_x.statistic) < 1e-8,
                "SR seed={seed}: {} vs {}",
                sr_z.statistic,
                sr_x.statistic
            );
            assert!(
                rel_err(sk_z.statistic, sk_x.statistic) < 1e-8,
                "SK seed={seed}: {} vs {}",
                sk_z.statistic,
                sk_x.statistic
            );
        }
    }
}

#[test]
fn john_statistic_is_scale_invariant_but_not_location_free() {
    // Q_J depends on the covariance only, so pure rescaling leaves it
    // unchanged; a translation leaves S unchanged as well.
    let x = sample(&ScenarioSpec::new(Scenario::StandardNormal, 10, 6, 0.0, 77)).unwrap();
    let r = sphericity_core::testing::john_statistic(&x).unwrap();
    let scaled_rows: Vec<Vec<f64>> = x
        .rows()
        .map(|row| row.iter().map(|v| 3.5 * v + 1.0).collect())
        .collect();
    let y = SampleMatrix::from_rows(&scaled_rows).unwrap();
    let ry = sphericity_core::testing::john_statistic(&y).unwrap();
    assert!(rel_err(r.statistic, ry.statistic) < 1e-10);
}
