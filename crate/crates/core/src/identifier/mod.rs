//! Recursive alternating-minimization identifier.
//!
//! Each update consumes `(φ_N, y_{N+1})` and performs, in order:
//!
//! 1. the regularized RLS step with proximal correction `μ P_{N+1}(Ξ_N − Ξ_{N−1})`
//!    ([`RlsCore`]), after which `Θ_{N+1} = (μI + Φ_NᵀΦ_N)⁻¹(Φ_NᵀY_{N+1} + μΞ_N)`;
//! 2. a refresh of `λ_max(N)`, `λ_min(N)` of `R_{N+1} = μI + Σ φ_k φ_kᵀ` ([`EigenTracker`]);
//! 3. adaptive weights `|Θ̂_{N+1}(s,t)| = |Θ_{N+1}(s,t)| + sqrt(log λ_max(N) / λ_min(N))`;
//! 4. soft-thresholding
//!    `Ξ_{N+1}(s,t) = sgn(Θ_{N+1}(s,t)) · max(|Θ_{N+1}(s,t)| − λ_N / (μ|Θ̂_{N+1}(s,t)|), 0)`.
//!
//! The sparse estimate `S_{N+1}` keeps `Θ_{N+1}` (or `Ξ_{N+1}`) off the zero set of `Ξ_{N+1}`.

mod armax;
mod eigen;
mod rls;
mod schedule;
mod sparse;

pub use armax::{regression_stream, ArmaxIdentifier, ArmaxIdentifierConfig, ArmaxRegressor, RegressionStream};
pub use eigen::{power_iteration, EigenMethod, EigenPolicy, EigenTracker};
pub use rls::RlsCore;
pub use schedule::LambdaSchedule;
pub use sparse::{extract_sparse, soft_threshold, soft_threshold_matrix, SparseEstimate, SparseMode};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{serde_matrix, sgn};

/// Below this `|Θ̂(s,t)|` the threshold is treated as infinite and the entry is zeroed.
pub const EPSILON_FLOOR: f64 = 1e-12;

/// Per-entry L1 weights `γ_N(s,t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightPolicy {
    /// `γ_N(s,t) = λ_N / |Θ̂_{N+1}(s,t)|` with `λ_N` from the schedule.
    #[default]
    Adaptive,
    /// `γ_N(s,t) = gamma` for every entry and step (online alternating minimization).
    Constant { gamma: f64 },
}

fn default_mu() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentifierConfig {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub schedule: LambdaSchedule,
    #[serde(default)]
    pub weights: WeightPolicy,
    #[serde(default)]
    pub sparse_mode: SparseMode,
    #[serde(default)]
    pub eigen_policy: EigenPolicy,
    #[serde(default)]
    pub eigen_method: EigenMethod,
}

impl Default for IdentifierConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            schedule: LambdaSchedule::default(),
            weights: WeightPolicy::Adaptive,
            sparse_mode: SparseMode::ThetaValues,
            eigen_policy: EigenPolicy::EveryStep,
            eigen_method: EigenMethod::FullSolve,
        }
    }
}

impl IdentifierConfig {
    /// Constant-weight variant: threshold `gamma / μ` at every step, no eigenvalue tracking.
    pub fn constant_weight(mu: f64, gamma: f64) -> Self {
        Self {
            mu,
            weights: WeightPolicy::Constant { gamma },
            eigen_policy: EigenPolicy::FinalOnly,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::config(format!("mu must be positive and finite, got {}", self.mu)));
        }
        match self.weights {
            WeightPolicy::Adaptive => self.schedule.validate(self.mu)?,
            WeightPolicy::Constant { gamma } => {
                if !(gamma >= 0.0) || !gamma.is_finite() {
                    return Err(Error::config(format!("constant weight must be finite and >= 0, got {gamma}")));
                }
            }
        }
        if let EigenPolicy::Stride { every: 0 } = self.eigen_policy {
            return Err(Error::config("eigen stride must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Identifier {
    config: IdentifierConfig,
    rls: RlsCore,
    info: DMatrix<f64>,
    eigen: EigenTracker,
    xi: DMatrix<f64>,
    xi_prev: DMatrix<f64>,
    delta: DMatrix<f64>,
    last_lambda: f64,
    step: usize,
    support_changes: usize,
    last_support_change: usize,
}

impl Identifier {
    /// `Θ_0 = Ξ_0 = Ξ_{−1} = 0`, `P_0 = I/μ`, `R_0 = μI`.
    pub fn new(d: usize, n: usize, config: IdentifierConfig) -> Result<Self> {
        config.validate()?;
        let mu = config.mu;
        Ok(Self {
            rls: RlsCore::new(d, n, mu)?,
            info: DMatrix::identity(d, d) * mu,
            eigen: EigenTracker::new(mu, d, config.eigen_policy, config.eigen_method),
            xi: DMatrix::zeros(d, n),
            xi_prev: DMatrix::zeros(d, n),
            delta: DMatrix::zeros(d, n),
            last_lambda: f64::NAN,
            step: 0,
            support_changes: 0,
            last_support_change: 0,
            config,
        })
    }

    /// Consumes `(φ_N, y_{N+1})` and advances every estimate by one step.
    pub fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()> {
        self.rls_core_update(phi, y_next)?;
        if self.eigen.due(self.step) || self.schedule_needs_eigen() {
            self.eigen_refresh();
        }
        let lambda = match self.config.weights {
            WeightPolicy::Adaptive => {
                let (max, min) = self.eigen.extremes();
                self.config.schedule.value(self.step - 1, max, min)?
            }
            WeightPolicy::Constant { gamma } => gamma,
        };
        self.soft_threshold_update(lambda)
    }

    fn schedule_needs_eigen(&self) -> bool {
        matches!(self.config.weights, WeightPolicy::Adaptive) && self.config.schedule.needs_eigenvalues()
    }

    /// RLS step with the proximal correction; also accumulates `R_{N+1}`.
    pub fn rls_core_update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<f64> {
        self.rls.check_inputs(phi, y_next)?;
        self.delta.copy_from(&self.xi);
        self.delta -= &self.xi_prev;
        let a = self.rls.update(phi, y_next, Some(&self.delta))?;
        self.info.ger(1.0, phi, phi, 1.0);
        self.step += 1;
        Ok(a)
    }

    /// Recomputes `(λ_max(N), λ_min(N))` regardless of policy.
    pub fn eigen_refresh(&mut self) -> (f64, f64) {
        self.eigen.refresh(&self.info, self.rls.gain())
    }

    /// `sqrt(log λ_max(N) / λ_min(N))`; errors when `λ_max < 1`.
    pub fn eig_ratio_term(&self) -> Result<f64> {
        let (max, min) = self.eigen.extremes();
        if max < 1.0 {
            return Err(Error::Schedule(format!(
                "lambda_max = {max} < 1 makes log lambda_max negative; raise mu to at least 1"
            )));
        }
        Ok((max.ln() / min).sqrt())
    }

    /// `Θ̂_{N+1}` with `sgn(0) = +1`.
    pub fn adaptive_weight_matrix(&self) -> Result<DMatrix<f64>> {
        let term = self.eig_ratio_term()?;
        Ok(self.rls.theta().map(|v| v + sgn(v) * term))
    }

    /// Produces `Ξ_{N+1}` from `Θ_{N+1}` and shifts the old value into `Ξ_N`.
    pub fn soft_threshold_update(&mut self, lambda: f64) -> Result<()> {
        let mu = self.config.mu;
        let adaptive = matches!(self.config.weights, WeightPolicy::Adaptive);
        if !lambda.is_finite() || lambda < 0.0 || (adaptive && lambda == 0.0) {
            return Err(Error::Schedule(format!("lambda_N must be positive, got {lambda}")));
        }
        let term = if adaptive { self.eig_ratio_term()? } else { 0.0 };
        std::mem::swap(&mut self.xi, &mut self.xi_prev);
        let theta = self.rls.theta();
        let mut changed = false;
        for ((x, &old), &t) in self.xi.iter_mut().zip(self.xi_prev.iter()).zip(theta.iter()) {
            let next = if adaptive {
                let weight = t.abs() + term;
                if weight <= EPSILON_FLOOR {
                    0.0
                } else {
                    soft_threshold(t, lambda / (mu * weight))
                }
            } else {
                soft_threshold(t, lambda / mu)
            };
            changed |= (next == 0.0) != (old == 0.0);
            *x = next;
        }
        if changed {
            self.support_changes += 1;
            self.last_support_change = self.step;
        }
        self.last_lambda = lambda;
        Ok(())
    }

    /// `S_{N+1}` in the configured mode.
    pub fn extract_sparse(&self) -> SparseEstimate {
        extract_sparse(self.rls.theta(), &self.xi, self.config.sparse_mode)
    }

    pub fn config(&self) -> &IdentifierConfig {
        &self.config
    }

    pub fn mu(&self) -> f64 {
        self.config.mu
    }

    pub fn dims(&self) -> (usize, usize) {
        self.rls.dims()
    }

    /// `Θ_N`.
    pub fn theta(&self) -> &DMatrix<f64> {
        self.rls.theta()
    }

    /// `Ξ_N`.
    pub fn xi(&self) -> &DMatrix<f64> {
        &self.xi
    }

    /// `Ξ_{N−1}`.
    pub fn xi_prev(&self) -> &DMatrix<f64> {
        &self.xi_prev
    }

    /// `P_N`.
    pub fn gain(&self) -> &DMatrix<f64> {
        self.rls.gain()
    }

    /// `R_N = P_N⁻¹`, maintained by rank-one additions.
    pub fn information(&self) -> &DMatrix<f64> {
        &self.info
    }

    /// Cached `(λ_max, λ_min)`.
    pub fn lambda_extremes(&self) -> (f64, f64) {
        self.eigen.extremes()
    }

    pub fn eigen_fallbacks(&self) -> usize {
        self.eigen.fallbacks()
    }

    /// Number of updates consumed.
    pub fn step(&self) -> usize {
        self.step
    }

    /// `λ_N` used by the latest soft-threshold step (NaN before the first one).
    pub fn last_lambda(&self) -> f64 {
        self.last_lambda
    }

    /// Steps at which the zero pattern of `Ξ` changed.
    pub fn support_changes(&self) -> usize {
        self.support_changes
    }

    /// Update count at the most recent zero-pattern change (0 if never).
    pub fn last_support_change(&self) -> usize {
        self.last_support_change
    }

    /// `‖P_N R_N − I‖_F / sqrt(d)`.
    pub fn inverse_residual(&self) -> f64 {
        let d = self.info.nrows();
        (self.rls.gain() * &self.info - DMatrix::identity(d, d)).norm() / (d as f64).sqrt()
    }

    pub fn snapshot(&self) -> EstimateSnapshot {
        let sparse = self.extract_sparse();
        let (lambda_max, lambda_min) = self.eigen.extremes();
        EstimateSnapshot {
            step: self.step,
            theta: self.rls.theta().clone(),
            xi: self.xi.clone(),
            s: sparse.s,
            zero_set: sparse.zero_set.entries.into_iter().collect(),
            lambda_max,
            lambda_min,
            lambda_n: self.last_lambda.is_finite().then_some(self.last_lambda),
            mode: self.config.sparse_mode,
        }
    }
}

/// JSON snapshot of an estimator; matrices are nested row-major arrays and `zero_set`
/// lists zero-based `(row, column)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSnapshot {
    pub step: usize,
    #[serde(with = "serde_matrix::row_major")]
    pub theta: DMatrix<f64>,
    #[serde(with = "serde_matrix::row_major")]
    pub xi: DMatrix<f64>,
    #[serde(with = "serde_matrix::row_major")]
    pub s: DMatrix<f64>,
    pub zero_set: Vec<(usize, usize)>,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub lambda_n: Option<f64>,
    pub mode: SparseMode,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_frobenius;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn init_state() {
        let id = Identifier::new(60, 10, IdentifierConfig::default()).unwrap();
        assert_eq!(id.lambda_extremes(), (1.0, 1.0));
        assert_eq!(id.eig_ratio_term().unwrap(), 0.0);
        assert_eq!(id.gain(), &DMatrix::identity(60, 60));
        assert!(id.theta().iter().chain(id.xi().iter()).all(|v| *v == 0.0));

        let cfg = IdentifierConfig { mu: 10000.0, ..Default::default() };
        let big = Identifier::new(5, 1, cfg).unwrap();
        assert!((big.gain() - DMatrix::identity(5, 5) * 1e-4).amax() < 1e-20);

        for mu in [0.0, -1.0] {
            let cfg = IdentifierConfig { mu, ..Default::default() };
            assert!(matches!(Identifier::new(5, 1, cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn first_step_with_zero_regressor_hard_zeros() {
        let mut id = Identifier::new(4, 2, IdentifierConfig::default()).unwrap();
        id.update(&DVector::zeros(4), &DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let w = id.adaptive_weight_matrix().unwrap();
        assert_eq!(&w, id.theta());
        assert!(id.xi().iter().all(|v| *v == 0.0));
        assert_eq!(id.extract_sparse().zero_set.len(), 8);
    }

    #[test]
    fn zero_theta_weights_are_the_ratio_term() {
        let cfg = IdentifierConfig { mu: 2.0, ..Default::default() };
        let id = Identifier::new(3, 2, cfg).unwrap();
        let term = (2f64.ln() / 2.0).sqrt();
        assert!(id.adaptive_weight_matrix().unwrap().iter().all(|v| (*v - term).abs() < 1e-15));
    }

    #[test]
    fn weight_error_when_lambda_max_below_one() {
        let cfg = IdentifierConfig { mu: 0.5, ..Default::default() };
        let id = Identifier::new(3, 1, cfg).unwrap();
        assert!(matches!(id.adaptive_weight_matrix(), Err(Error::Schedule(_))));
    }

    #[test]
    fn nonpositive_lambda_rejected() {
        let mut id = Identifier::new(3, 1, IdentifierConfig::default()).unwrap();
        assert!(matches!(id.soft_threshold_update(0.0), Err(Error::Schedule(_))));
        assert!(matches!(id.soft_threshold_update(-1.0), Err(Error::Schedule(_))));
    }

    #[test]
    fn non_finite_input_leaves_state_untouched() {
        let mut id = Identifier::new(3, 1, IdentifierConfig::default()).unwrap();
        let phi = DVector::from_vec(vec![1.0, f64::INFINITY, 0.0]);
        assert!(matches!(id.update(&phi, &DVector::zeros(1)), Err(Error::Data(_))));
        assert_eq!(id.step(), 0);
        assert_eq!(id.information(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn invariants_on_random_stream() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d, n) = (8, 2);
        let mut id = Identifier::new(d, n, IdentifierConfig::default()).unwrap();
        let mut prev = id.lambda_extremes();
        for _ in 0..300 {
            let phi = random_vec(&mut rng, d) * 2.0;
            let y = random_vec(&mut rng, n);
            id.update(&phi, &y).unwrap();
            let (max, min) = id.lambda_extremes();
            assert!(min >= 1.0 - 1e-9);
            assert!(max >= prev.0 * (1.0 - 1e-12) && min >= prev.1 * (1.0 - 1e-12));
            prev = (max, min);

            // shrinkage bound and support rule
            let term = id.eig_ratio_term().unwrap();
            let lambda = id.last_lambda();
            let hat = id.adaptive_weight_matrix().unwrap();
            for s in 0..d {
                for t in 0..n {
                    let th = id.theta()[(s, t)];
                    let x = id.xi()[(s, t)];
                    assert!(hat[(s, t)].abs() >= term - 1e-15);
                    if term > 0.0 {
                        assert!((x - th).abs() <= lambda / (id.mu() * term) + 1e-12);
                    }
                    if th.abs() < lambda / (id.mu() * hat[(s, t)].abs()) {
                        assert_eq!(x, 0.0);
                    }
                }
            }
        }
        assert!(id.inverse_residual() < 1e-6);
    }

    #[test]
    fn constant_weight_thresholds_at_gamma_over_mu() {
        let mut id = Identifier::new(2, 1, IdentifierConfig::constant_weight(2.0, 0.5)).unwrap();
        let phi = DVector::from_vec(vec![1.0, 0.0]);
        id.update(&phi, &DVector::from_element(1, 3.0)).unwrap();
        // Θ_1 = (2I + φφᵀ)⁻¹ φ y = [1, 0]
        assert!((id.theta()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((id.xi()[(0, 0)] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn power_iteration_path_tracks_full_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (d, n) = (12, 2);
        let full_cfg = IdentifierConfig::default();
        let pow_cfg = IdentifierConfig { eigen_method: EigenMethod::PowerIteration, ..Default::default() };
        let mut full = Identifier::new(d, n, full_cfg).unwrap();
        let mut pow = Identifier::new(d, n, pow_cfg).unwrap();
        for _ in 0..200 {
            let phi = random_vec(&mut rng, d);
            let y = random_vec(&mut rng, n);
            full.update(&phi, &y).unwrap();
            pow.update(&phi, &y).unwrap();
        }
        let (a, b) = (full.lambda_extremes(), pow.lambda_extremes());
        assert!(((a.0 - b.0) / a.0).abs() < 1e-6);
        assert!(((a.1 - b.1) / a.1).abs() < 1e-6);
        assert!(relative_frobenius(pow.theta(), full.theta()) < 1e-6);
    }

    #[test]
    fn snapshot_json_shape() {
        let mut id = Identifier::new(3, 2, IdentifierConfig::default()).unwrap();
        id.update(&DVector::from_vec(vec![1.0, 0.5, -0.2]), &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let json = serde_json::to_value(id.snapshot()).unwrap();
        for key in ["step", "theta", "xi", "s", "zero_set", "lambda_max", "lambda_min", "lambda_n", "mode"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["theta"].as_array().unwrap().len(), 3);
        assert_eq!(json["theta"][0].as_array().unwrap().len(), 2);
        let back: EstimateSnapshot = serde_json::from_value(json).unwrap();
        assert_eq!(back, id.snapshot());
    }
}
