//! Extreme eigenvalues of the information matrix `R_N = μI + Σ φ_k φ_kᵀ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::symmetric_extremes;

/// When to recompute `λ_max(N)` and `λ_min(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EigenPolicy {
    #[default]
    EveryStep,
    /// Refresh every `every` updates, reusing the cached pair in between.
    Stride { every: usize },
    /// Only when explicitly requested.
    FinalOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    #[default]
    FullSolve,
    /// Warm-started power iteration on `R` for `λ_max` and on `P = R⁻¹` for `1/λ_min`;
    /// falls back to the full solve when it does not converge.
    PowerIteration,
}

const POWER_TOL: f64 = 1e-7;
const POWER_MAX_ITER: usize = 500;

#[derive(Clone, Debug)]
pub struct EigenTracker {
    policy: EigenPolicy,
    method: EigenMethod,
    lambda_max: f64,
    lambda_min: f64,
    v_max: DVector<f64>,
    v_min: DVector<f64>,
    fallbacks: usize,
}

impl EigenTracker {
    /// Starts from `R_0 = μI`.
    pub fn new(mu: f64, dim: usize, policy: EigenPolicy, method: EigenMethod) -> Self {
        let start = DVector::from_fn(dim, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
        let start = start.normalize();
        Self {
            policy,
            method,
            lambda_max: mu,
            lambda_min: mu,
            v_max: start.clone(),
            v_min: start,
            fallbacks: 0,
        }
    }

    pub fn policy(&self) -> EigenPolicy {
        self.policy
    }

    pub fn extremes(&self) -> (f64, f64) {
        (self.lambda_max, self.lambda_min)
    }

    /// Number of times the iterative path fell back to the full solve.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    /// Whether the policy asks for a refresh after update number `updates` (1-based).
    pub fn due(&self, updates: usize) -> bool {
        match self.policy {
            EigenPolicy::EveryStep => true,
            EigenPolicy::Stride { every } => every <= 1 || updates % every == 0,
            EigenPolicy::FinalOnly => false,
        }
    }

    /// Recomputes the pair from `info = R` (and `gain = R⁻¹` for the iterative path).
    pub fn refresh(&mut self, info: &DMatrix<f64>, gain: &DMatrix<f64>) -> (f64, f64) {
        let pair = match self.method {
            EigenMethod::FullSolve => None,
            EigenMethod::PowerIteration => {
                let top = power_iteration(info, &mut self.v_max);
                let inv_top = power_iteration(gain, &mut self.v_min);
                match (top, inv_top) {
                    (Some(max), Some(inv)) if inv > 0.0 => Some((max, 1.0 / inv)),
                    _ => {
                        self.fallbacks += 1;
                        None
                    }
                }
            }
        };
        let (max, min) = pair.unwrap_or_else(|| symmetric_extremes(info));
        self.lambda_max = max;
        self.lambda_min = min;
        (max, min)
    }
}

/// Dominant eigenvalue of a symmetric positive semi-definite matrix, warm-started from `v`.
///
/// Stops when the eigen-residual `‖Mv − ρv‖` falls below `POWER_TOL · ρ`; returns `None`
/// if that does not happen within `POWER_MAX_ITER` iterations.
pub fn power_iteration(m: &DMatrix<f64>, v: &mut DVector<f64>) -> Option<f64> {
    let mut w = m * &*v;
    for _ in 0..POWER_MAX_ITER {
        let rho = v.dot(&w);
        let resid = (&w - &*v * rho).norm();
        let norm = w.norm();
        if norm == 0.0 {
            return None;
        }
        if resid <= POWER_TOL * rho.abs() {
            return Some(rho);
        }
        *v = &w / norm;
        w = m * &*v;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scaled_identity() {
        let mut t = EigenTracker::new(3.0, 4, EigenPolicy::EveryStep, EigenMethod::FullSolve);
        assert_eq!(t.extremes(), (3.0, 3.0));
        let r = DMatrix::identity(4, 4) * 3.0;
        let p = DMatrix::identity(4, 4) / 3.0;
        let (max, min) = t.refresh(&r, &p);
        assert!((max - 3.0).abs() < 1e-12 && (min - 3.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pair() {
        let r = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 10.0]));
        let p = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.1]));
        for method in [EigenMethod::FullSolve, EigenMethod::PowerIteration] {
            let mut t = EigenTracker::new(1.0, 2, EigenPolicy::EveryStep, method);
            let (max, min) = t.refresh(&r, &p);
            assert!((max - 10.0).abs() < 1e-9, "{method:?}");
            assert!((min - 1.0).abs() < 1e-9, "{method:?}");
        }
    }

    #[test]
    fn power_path_matches_full_solve_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let d = 60;
        let a = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() - 0.5);
        let r = a.transpose() * &a + DMatrix::identity(d, d);
        let p = r.clone().try_inverse().unwrap();
        let (full_max, full_min) = symmetric_extremes(&r);
        let mut t = EigenTracker::new(1.0, d, EigenPolicy::EveryStep, EigenMethod::PowerIteration);
        let (max, min) = t.refresh(&r, &p);
        assert!(((max - full_max) / full_max).abs() < 1e-6, "{max} vs {full_max}");
        assert!(((min - full_min) / full_min).abs() < 1e-6, "{min} vs {full_min}");
    }

    #[test]
    fn stride_policy() {
        let t = EigenTracker::new(1.0, 2, EigenPolicy::Stride { every: 5 }, EigenMethod::FullSolve);
        assert!(!t.due(4));
        assert!(t.due(5));
        let f = EigenTracker::new(1.0, 2, EigenPolicy::FinalOnly, EigenMethod::FullSolve);
        assert!(!f.due(1));
    }
}
