mod common;

use common::gaussian;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparse_armax::baselines::{
    lsw_solve, sindy_solve, Estimator, EstimatorConfig, EstimatorKind, LswOptions, OamEstimator, RlsEstimator,
};

fn lsw_objective(gram: &DMatrix<f64>, b: &DVector<f64>, w: &[f64], x: &DVector<f64>) -> f64 {
    let pen: f64 = x.iter().zip(w).map(|(v, w)| w * v.abs()).sum();
    0.5 * x.dot(&(gram * x)) - b.dot(x) + pen
}

/// Exhaustive search over sign patterns: for each pattern the stationarity condition on its
/// active set is linear, and the global minimizer is the sign-consistent candidate of lowest
/// objective.
fn lsw_by_sign_enumeration(gram: &DMatrix<f64>, b: &DVector<f64>, w: &[f64]) -> DVector<f64> {
    let d = b.len();
    let mut best = DVector::zeros(d);
    let mut best_obj = 0.0;
    for code in 0..3usize.pow(d as u32) {
        let mut signs = vec![0.0; d];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = [0.0, 1.0, -1.0][c % 3];
            c /= 3;
        }
        let active: Vec<usize> = (0..d).filter(|&i| signs[i] != 0.0).collect();
        if active.is_empty() {
            continue;
        }
        let k = active.len();
        let g = DMatrix::from_fn(k, k, |i, j| gram[(active[i], active[j])]);
        let rhs = DVector::from_fn(k, |i, _| b[active[i]] - w[active[i]] * signs[active[i]]);
        let Some(sol) = g.lu().solve(&rhs) else { continue };
        if active.iter().zip(sol.iter()).any(|(&i, v)| v.signum() != signs[i] || *v == 0.0) {
            continue;
        }
        let mut x = DVector::zeros(d);
        for (&i, v) in active.iter().zip(sol.iter()) {
            x[i] = *v;
        }
        let obj = lsw_objective(gram, b, w, &x);
        if obj < best_obj {
            best_obj = obj;
            best = x;
        }
    }
    best
}

#[test]
fn lsw_matches_sign_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (d, n, samples) = (5, 2, 40);
    let opts = LswOptions { max_iter: 100_000, tol: 1e-13, record_objective: false };
    let mut zeros_seen = 0;
    for trial in 0..10 {
        let phi = gaussian(&mut rng, samples, d);
        let truth = DMatrix::from_row_slice(d, n, &[1.0, 0.0, 0.0, -0.7, 0.4, 0.0, 0.0, 0.0, -1.2, 0.3]);
        let y = &phi * &truth + gaussian(&mut rng, samples, n) * 0.5;
        let (lambda, ridge_mu) = (2.0 + trial as f64, 1.0);
        let sol = lsw_solve(&phi, &y, lambda, ridge_mu, &opts).unwrap();
        assert!(sol.converged);

        let gram = phi.tr_mul(&phi);
        let ridge = (&gram + DMatrix::identity(d, d) * ridge_mu).lu().solve(&phi.tr_mul(&y)).unwrap();
        for t in 0..n {
            let w: Vec<f64> = ridge.column(t).iter().map(|r| lambda / r.abs()).collect();
            let b = phi.tr_mul(&y.column(t));
            let oracle = lsw_by_sign_enumeration(&gram, &b.column(0).clone_owned(), &w);
            zeros_seen += oracle.iter().filter(|v| **v == 0.0).count();
            for s in 0..d {
                assert!((sol.theta[(s, t)] - oracle[s]).abs() <= 1e-6, "trial {trial} ({s},{t}): {} vs {}", sol.theta[(s, t)], oracle[s]);
                assert_eq!(sol.theta[(s, t)] == 0.0, oracle[s] == 0.0, "support differs at ({s},{t})");
            }
        }
    }
    assert!(zeros_seen > 0, "the oracle never produced a zero; the test is too easy");
}

fn ls(phi: &DMatrix<f64>, y: &DVector<f64>, cols: &[usize]) -> Vec<f64> {
    let sub = DMatrix::from_fn(phi.nrows(), cols.len(), |i, j| phi[(i, cols[j])]);
    let sol = sub.tr_mul(&sub).lu().solve(&sub.tr_mul(y)).unwrap();
    sol.iter().copied().collect()
}

#[test]
fn sindy_matches_hand_unrolled_iterations() {
    // Columns 0 and 1 carry the signal; column 2 is weak but correlated with column 3.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 60;
    let mut phi = gaussian(&mut rng, samples, 4);
    for i in 0..samples {
        phi[(i, 2)] = 0.9 * phi[(i, 3)] + 0.45 * phi[(i, 2)];
    }
    let truth = DVector::from_vec(vec![1.5, -0.8, 0.12, 0.0]);
    let y = &phi * &truth + DVector::from_fn(samples, |_, _| 0.05 * rng.sample::<f64, _>(StandardNormal));
    let threshold = 0.2;

    // Round 1 on everything, drop small entries, round 2 on the survivors, and so on.
    let r1 = ls(&phi, &y, &[0, 1, 2, 3]);
    let keep1: Vec<usize> = (0..4).filter(|&i| r1[i].abs() >= threshold).collect();
    let r2 = ls(&phi, &y, &keep1);
    let keep2: Vec<usize> = keep1.iter().zip(&r2).filter(|(_, v)| v.abs() >= threshold).map(|(i, _)| *i).collect();
    let r3 = ls(&phi, &y, &keep2);
    let keep3: Vec<usize> = keep2.iter().zip(&r3).filter(|(_, v)| v.abs() >= threshold).map(|(i, _)| *i).collect();
    assert_eq!(keep3, keep2, "expected the active set to settle within three rounds");
    assert_eq!(keep3, vec![0, 1]);
    let mut expected = vec![0.0; 4];
    for (i, v) in keep3.iter().zip(&r3) {
        expected[*i] = *v;
    }

    let sol = sindy_solve(&phi, &DMatrix::from_column_slice(samples, 1, y.as_slice()), threshold, 50).unwrap();
    assert!(sol.converged);
    for i in 0..4 {
        assert!((sol.theta[(i, 0)] - expected[i]).abs() <= 1e-10, "{i}: {} vs {}", sol.theta[(i, 0)], expected[i]);
    }
    assert_eq!(sol.active_sizes[0].first(), Some(&4));
}

#[test]
fn oam_without_penalty_differs_from_rls_by_the_proximal_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (d, n, mu) = (6, 2, 1.0);
    let theta = gaussian(&mut rng, d, n);
    let mut oam = OamEstimator::new(d, n, mu, 0.0).unwrap();
    let mut rls = RlsEstimator::new(d, n, mu).unwrap();
    for step in 0..150 {
        let phi = DVector::from_fn(d, |_, _| rng.sample(StandardNormal));
        let y = theta.tr_mul(&phi) + DVector::from_fn(n, |_, _| 0.3 * rng.sample::<f64, _>(StandardNormal));
        let before = oam.identifier().theta().clone();
        oam.update(&phi, &y).unwrap();
        rls.update(&phi, &y).unwrap();
        let ident = oam.identifier();
        // With λ = 0 the sparse iterate equals the dense one.
        assert_eq!(ident.xi(), ident.theta());
        let lhs = ident.theta() - rls.theta();
        let rhs = ident.gain() * &before * mu;
        let err = (&lhs - &rhs).norm() / rhs.norm().max(1e-12);
        assert!(err <= 1e-8, "step {step}: {err:e}");
    }
}

#[test]
fn rls_recovers_noiseless_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (d, n) = (12, 3);
    let theta = gaussian(&mut rng, d, n);
    let mut rls = EstimatorConfig::default_for(EstimatorKind::Rls).build(d, n).unwrap();
    for _ in 0..300 {
        let phi = DVector::from_fn(d, |_, _| rng.sample(StandardNormal));
        rls.update(&phi, &theta.tr_mul(&phi)).unwrap();
    }
    let est = rls.checkpoint().unwrap();
    assert!((&est.values - &theta).norm() / theta.norm() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lsw_objective_is_monotone(seed in any::<u64>(), lambda in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = gaussian(&mut rng, 30, 6);
        let y = gaussian(&mut rng, 30, 2);
        let opts = LswOptions { record_objective: true, ..LswOptions::default() };
        let sol = lsw_solve(&phi, &y, lambda, 1.0, &opts).unwrap();
        for hist in &sol.objective_history {
            for w in hist.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn sindy_output_respects_threshold(seed in any::<u64>(), threshold in 0.0f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = gaussian(&mut rng, 25, 5);
        let y = gaussian(&mut rng, 25, 2);
        let sol = sindy_solve(&phi, &y, threshold, 50).unwrap();
        if sol.converged {
            prop_assert!(sol.theta.iter().all(|v| *v == 0.0 || v.abs() >= threshold));
        }
        for sizes in &sol.active_sizes {
            prop_assert!(sizes.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
