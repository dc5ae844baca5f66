mod common;

use common::{batch_theta, gaussian_vec, numeric_prox, rel, rng, sparse_theta};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use sparse_armax::identifier::{
    soft_threshold, soft_threshold_matrix, Identifier, IdentifierConfig, LambdaSchedule, EPSILON_FLOOR,
};

#[test]
fn recursion_matches_batch_closed_form_for_other_tunings() {
    let mut rng = rng(101);
    let configs = [
        IdentifierConfig { mu: 2.5, ..IdentifierConfig::default() },
        IdentifierConfig { mu: 4.0, schedule: LambdaSchedule::EigRatioSqrt { scale: 0.5 }, ..IdentifierConfig::default() },
        IdentifierConfig::constant_weight(0.7, 0.2),
    ];
    for config in configs {
        for (d, n) in [(4, 2), (12, 3)] {
            let theta = sparse_theta(&mut rng, d, n);
            let mut ident = Identifier::new(d, n, config.clone()).unwrap();
            let (mut phis, mut ys) = (Vec::new(), Vec::new());
            for step in 0..150 {
                let phi = gaussian_vec(&mut rng, d);
                let y = theta.tr_mul(&phi) + gaussian_vec(&mut rng, n) * 0.5;
                ident.update(&phi, &y).unwrap();
                phis.push(phi);
                ys.push(y);
                let oracle = batch_theta(&phis, &ys, ident.mu(), ident.xi_prev());
                let err = rel(ident.theta(), &oracle);
                assert!(err <= 1e-8, "d={d} n={n} step={step}: {err:e}");
            }
        }
    }
}

#[test]
fn gain_tracks_direct_inverse_with_multiple_outputs() {
    let mut rng = rng(7);
    let (d, n) = (12, 3);
    let mu = 0.5;
    let config = IdentifierConfig::constant_weight(mu, 0.1);
    let mut ident = Identifier::new(d, n, config).unwrap();
    let mut info = DMatrix::identity(d, d) * mu;
    for step in 0..300 {
        let phi = gaussian_vec(&mut rng, d) * 3.0;
        let y = gaussian_vec(&mut rng, n);
        ident.update(&phi, &y).unwrap();
        info += &phi * phi.transpose();
        let direct = info.clone().try_inverse().unwrap();
        let err = rel(ident.gain(), &direct);
        assert!(err <= 1e-8, "step {step}: {err:e}");
    }
    assert!(rel(ident.information(), &info) <= 1e-12);
}

#[test]
fn soft_threshold_near_the_kink() {
    let mut rng = rng(2024);
    for _ in 0..50 {
        let gamma = 0.05 + rng.random::<f64>();
        for offset in [-1e-3, -1e-5, 0.0, 1e-5, 1e-3] {
            for sign in [-1.0, 1.0] {
                let y = sign * (gamma + offset);
                let numeric = numeric_prox(y, gamma);
                assert!((soft_threshold(y, gamma) - numeric).abs() <= 1e-6, "y={y} gamma={gamma}");
            }
        }
        let big = DMatrix::from_element(2, 2, 10.0 * gamma);
        assert!(rel(&soft_threshold_matrix(&big, gamma), &DMatrix::from_element(2, 2, 9.0 * gamma)) <= 1e-15);
    }
}

#[test]
fn xi_is_the_weighted_proximal_point_of_theta() {
    let mut rng = rng(9);
    let (d, n) = (8, 2);
    let theta = sparse_theta(&mut rng, d, n);
    let mut ident = Identifier::new(d, n, IdentifierConfig::default()).unwrap();
    for _ in 0..60 {
        let phi = gaussian_vec(&mut rng, d);
        let y = theta.tr_mul(&phi) + gaussian_vec(&mut rng, n);
        ident.update(&phi, &y).unwrap();
        let weights = ident.adaptive_weight_matrix().unwrap();
        let lambda = ident.last_lambda();
        for ((x, t), w) in ident.xi().iter().zip(ident.theta().iter()).zip(weights.iter()) {
            // Ξ = argmin ½(θ − x)² + λ/(μ|θ̂|)·|x|
            let expected = if w.abs() <= EPSILON_FLOOR { 0.0 } else { numeric_prox(*t, lambda / (ident.mu() * w.abs())) };
            assert!((x - expected).abs() <= 1e-6, "{x} vs {expected}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn soft_threshold_properties(y in -50.0f64..50.0, z in -50.0f64..50.0, gamma in 0.0f64..10.0) {
        let s = soft_threshold(y, gamma);
        prop_assert!(s.abs() <= y.abs());
        prop_assert!(s == 0.0 || s.signum() == y.signum());
        prop_assert_eq!(s == 0.0, y.abs() <= gamma);
        // Nonexpansive.
        prop_assert!((s - soft_threshold(z, gamma)).abs() <= (y - z).abs() + 1e-12);
        // Optimality: y − s is a subgradient of γ|·| at s.
        let g = y - s;
        if s != 0.0 {
            prop_assert!((g - gamma * s.signum()).abs() <= 1e-9);
        } else {
            prop_assert!(g.abs() <= gamma + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stream_invariants(seed in any::<u64>(), d in 2usize..10, n in 1usize..4, steps in 1usize..80) {
        let mut rng = rng(seed);
        let theta = sparse_theta(&mut rng, d, n);
        let mut ident = Identifier::new(d, n, IdentifierConfig::default()).unwrap();
        let (mut prev_max, mut prev_min) = ident.lambda_extremes();
        for _ in 0..steps {
            let phi = gaussian_vec(&mut rng, d);
            let y = theta.tr_mul(&phi) + gaussian_vec(&mut rng, n);
            ident.update(&phi, &y).unwrap();
            let (max, min) = ident.lambda_extremes();
            // R only gains rank-one PSD terms.
            prop_assert!(max >= prev_max * (1.0 - 1e-10));
            prop_assert!(min >= prev_min * (1.0 - 1e-10));
            prop_assert!(min >= ident.mu() * (1.0 - 1e-10));
            prev_max = max;
            prev_min = min;
            for (x, t) in ident.xi().iter().zip(ident.theta().iter()) {
                prop_assert!(x.abs() <= t.abs());
                prop_assert!(*x == 0.0 || x.signum() == t.signum());
            }
            let sparse = ident.extract_sparse();
            for ((s, x), t) in sparse.s.iter().zip(ident.xi().iter()).zip(ident.theta().iter()) {
                prop_assert_eq!(*s, if *x == 0.0 { 0.0 } else { *t });
            }
            let p = ident.gain();
            prop_assert!(rel(p, &p.transpose()) < 1e-12);
        }
    }
}
