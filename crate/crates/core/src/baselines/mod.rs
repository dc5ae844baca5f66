//! Comparison estimators behind one interface.
//!
//! Streaming kinds (`alg1`, `rls`, `oam`) update on every sample. Batch kinds (`lsw`,
//! `sindy`) only store the data and re-solve from scratch whenever a checkpoint is requested,
//! which is what makes them offline methods in the timing comparison.
//!
//! OAM is implemented as the constant-weight specialization of the alternating recursion:
//! threshold `λ/μ` at every step, no adaptive reweighting. This is an approximation of the
//! original online alternating-minimization method, whose excitation constants are not
//! reproduced.

mod lsw;
mod sindy;

pub use lsw::{lsw_solve, lsw_solve_gram, LswOptions, LswSolution};
pub use sindy::{sindy_solve, sindy_solve_gram, SindySolution};

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identifier::{Identifier, IdentifierConfig, RlsCore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Alg1,
    Rls,
    Oam,
    Lsw,
    Sindy,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] =
        [EstimatorKind::Alg1, EstimatorKind::Rls, EstimatorKind::Oam, EstimatorKind::Lsw, EstimatorKind::Sindy];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Alg1 => "alg1",
            EstimatorKind::Rls => "rls",
            EstimatorKind::Oam => "oam",
            EstimatorKind::Lsw => "lsw",
            EstimatorKind::Sindy => "sindy",
        }
    }

    pub fn is_batch(&self) -> bool {
        matches!(self, EstimatorKind::Lsw | EstimatorKind::Sindy)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm '{s}'")))
    }
}

/// Estimate at a checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointEstimate {
    /// Matrix scored by the estimation error.
    pub values: DMatrix<f64>,
    /// Matrix scored by the support-recovery rate.
    pub sparse: DMatrix<f64>,
    /// Set when an iterative solver hit its cap.
    pub warning: Option<String>,
}

pub trait Estimator: Send {
    fn kind(&self) -> EstimatorKind;

    /// Consumes `(φ_N, y_{N+1})`.
    fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()>;

    /// Estimate from everything consumed so far. Batch kinds solve here.
    fn checkpoint(&mut self) -> Result<CheckpointEstimate>;

    /// Update count at the last change of the estimated zero pattern, for kinds that track it.
    fn last_support_change(&self) -> Option<usize> {
        None
    }
}

fn default_rls_mu() -> f64 {
    1e-4
}

/// `P_0 = I/mu`; the default `mu = 1e-4` is the weak prior `P_0 = 10⁴ I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlsConfig {
    #[serde(default = "default_rls_mu")]
    pub mu: f64,
}

impl Default for RlsConfig {
    fn default() -> Self {
        Self { mu: default_rls_mu() }
    }
}

fn one() -> f64 {
    1.0
}

fn default_oam_lambda() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OamConfig {
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "default_oam_lambda")]
    pub lambda: f64,
}

impl Default for OamConfig {
    fn default() -> Self {
        Self { mu: 1.0, lambda: default_oam_lambda() }
    }
}

fn default_lsw_exponent() -> f64 {
    0.8
}

/// `λ_N = scale · N^exponent`; weights `λ_N / |θ̂_ridge(s,t)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LswConfig {
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "default_lsw_exponent")]
    pub exponent: f64,
    #[serde(default = "one")]
    pub ridge_mu: f64,
    #[serde(default)]
    pub solver: LswOptions,
}

impl Default for LswConfig {
    fn default() -> Self {
        Self { scale: 1.0, exponent: default_lsw_exponent(), ridge_mu: 1.0, solver: LswOptions::default() }
    }
}

fn default_sindy_threshold() -> f64 {
    0.1
}

fn default_sindy_iterations() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SindyConfig {
    #[serde(default = "default_sindy_threshold")]
    pub threshold: f64,
    #[serde(default = "default_sindy_iterations")]
    pub max_iter: usize,
}

impl Default for SindyConfig {
    fn default() -> Self {
        Self { threshold: default_sindy_threshold(), max_iter: default_sindy_iterations() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorConfig {
    Alg1(IdentifierConfig),
    Rls(RlsConfig),
    Oam(OamConfig),
    Lsw(LswConfig),
    Sindy(SindyConfig),
}

impl EstimatorConfig {
    /// Tuning used in the reference comparison.
    pub fn default_for(kind: EstimatorKind) -> Self {
        match kind {
            EstimatorKind::Alg1 => EstimatorConfig::Alg1(IdentifierConfig::default()),
            EstimatorKind::Rls => EstimatorConfig::Rls(RlsConfig::default()),
            EstimatorKind::Oam => EstimatorConfig::Oam(OamConfig::default()),
            EstimatorKind::Lsw => EstimatorConfig::Lsw(LswConfig::default()),
            EstimatorKind::Sindy => EstimatorConfig::Sindy(SindyConfig::default()),
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            EstimatorConfig::Alg1(_) => EstimatorKind::Alg1,
            EstimatorConfig::Rls(_) => EstimatorKind::Rls,
            EstimatorConfig::Oam(_) => EstimatorKind::Oam,
            EstimatorConfig::Lsw(_) => EstimatorKind::Lsw,
            EstimatorConfig::Sindy(_) => EstimatorKind::Sindy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            EstimatorConfig::Alg1(c) => c.validate(),
            EstimatorConfig::Rls(c) => positive("rls mu", c.mu),
            EstimatorConfig::Oam(c) => {
                positive("oam mu", c.mu)?;
                if !(c.lambda >= 0.0 && c.lambda.is_finite()) {
                    return Err(Error::config(format!("oam lambda must be >= 0, got {}", c.lambda)));
                }
                Ok(())
            }
            EstimatorConfig::Lsw(c) => {
                positive("lsw scale", c.scale)?;
                positive("lsw ridge_mu", c.ridge_mu)?;
                if !c.exponent.is_finite() {
                    return Err(Error::config("lsw exponent must be finite"));
                }
                c.solver.validate()
            }
            EstimatorConfig::Sindy(c) => {
                if !(c.threshold >= 0.0 && c.threshold.is_finite()) {
                    return Err(Error::config(format!("sindy threshold must be >= 0, got {}", c.threshold)));
                }
                if c.max_iter == 0 {
                    return Err(Error::config("sindy max_iter must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn build(&self, d: usize, n: usize) -> Result<Box<dyn Estimator>> {
        self.validate()?;
        Ok(match self {
            EstimatorConfig::Alg1(c) => Box::new(Alg1Estimator::new(d, n, c.clone())?),
            EstimatorConfig::Rls(c) => Box::new(RlsEstimator::new(d, n, c.mu)?),
            EstimatorConfig::Oam(c) => Box::new(OamEstimator::new(d, n, c.mu, c.lambda)?),
            EstimatorConfig::Lsw(c) => Box::new(LswEstimator::new(d, n, c.clone())),
            EstimatorConfig::Sindy(c) => Box::new(SindyEstimator::new(d, n, c.clone())),
        })
    }
}

/// The adaptive identifier; scored on `S_N` for both metrics.
pub struct Alg1Estimator {
    inner: Identifier,
}

impl Alg1Estimator {
    pub fn new(d: usize, n: usize, config: IdentifierConfig) -> Result<Self> {
        Ok(Self { inner: Identifier::new(d, n, config)? })
    }

    pub fn identifier(&self) -> &Identifier {
        &self.inner
    }
}

impl Estimator for Alg1Estimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Alg1
    }

    fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()> {
        self.inner.update(phi, y_next)
    }

    fn checkpoint(&mut self) -> Result<CheckpointEstimate> {
        let s = self.inner.extract_sparse().s;
        Ok(CheckpointEstimate { values: s.clone(), sparse: s, warning: None })
    }

    fn last_support_change(&self) -> Option<usize> {
        Some(self.inner.last_support_change())
    }
}

pub struct RlsEstimator {
    core: RlsCore,
}

impl RlsEstimator {
    pub fn new(d: usize, n: usize, mu: f64) -> Result<Self> {
        Ok(Self { core: RlsCore::new(d, n, mu)? })
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        self.core.theta()
    }
}

impl Estimator for RlsEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Rls
    }

    fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()> {
        self.core.update(phi, y_next, None).map(|_| ())
    }

    fn checkpoint(&mut self) -> Result<CheckpointEstimate> {
        let theta = self.core.theta().clone();
        Ok(CheckpointEstimate { values: theta.clone(), sparse: theta, warning: None })
    }
}

/// Values from the `Θ` path, support from `Ξ`.
pub struct OamEstimator {
    inner: Identifier,
}

impl OamEstimator {
    pub fn new(d: usize, n: usize, mu: f64, lambda: f64) -> Result<Self> {
        Ok(Self { inner: Identifier::new(d, n, IdentifierConfig::constant_weight(mu, lambda))? })
    }

    pub fn identifier(&self) -> &Identifier {
        &self.inner
    }
}

impl Estimator for OamEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Oam
    }

    fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()> {
        self.inner.update(phi, y_next)
    }

    fn checkpoint(&mut self) -> Result<CheckpointEstimate> {
        Ok(CheckpointEstimate { values: self.inner.theta().clone(), sparse: self.inner.xi().clone(), warning: None })
    }

    fn last_support_change(&self) -> Option<usize> {
        Some(self.inner.last_support_change())
    }
}

/// Retained samples for the batch kinds.
#[derive(Clone, Debug)]
struct BatchData {
    d: usize,
    n: usize,
    phis: Vec<DVector<f64>>,
    ys: Vec<DVector<f64>>,
}

impl BatchData {
    fn new(d: usize, n: usize) -> Self {
        Self { d, n, phis: Vec::new(), ys: Vec::new() }
    }

    fn push(&mut self, phi: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        if phi.len() != self.d || y.len() != self.n {
            return Err(Error::invalid(format!(
                "expected regressor of length {} and output of length {}",
                self.d, self.n
            )));
        }
        if !crate::linalg::all_finite(phi.iter().chain(y.iter())) {
            return Err(Error::Data("non-finite regressor or output".into()));
        }
        self.phis.push(phi.clone());
        self.ys.push(y.clone());
        Ok(())
    }

    /// `(Φ, Y)` with one sample per row.
    fn matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let rows = self.phis.len();
        let phi = DMatrix::from_fn(rows, self.d, |i, j| self.phis[i][j]);
        let y = DMatrix::from_fn(rows, self.n, |i, j| self.ys[i][j]);
        (phi, y)
    }
}

pub struct LswEstimator {
    config: LswConfig,
    data: BatchData,
}

impl LswEstimator {
    pub fn new(d: usize, n: usize, config: LswConfig) -> Self {
        Self { config, data: BatchData::new(d, n) }
    }
}

impl Estimator for LswEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Lsw
    }

    fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()> {
        self.data.push(phi, y_next)
    }

    fn checkpoint(&mut self) -> Result<CheckpointEstimate> {
        let samples = self.data.phis.len();
        if samples == 0 {
            let zero = DMatrix::zeros(self.data.d, self.data.n);
            return Ok(CheckpointEstimate { values: zero.clone(), sparse: zero, warning: None });
        }
        let lambda = self.config.scale * (samples as f64).powf(self.config.exponent);
        let (phi, y) = self.data.matrices();
        let sol = lsw_solve(&phi, &y, lambda, self.config.ridge_mu, &self.config.solver)?;
        let warning = (!sol.converged).then(|| {
            format!("lsw hit the iteration cap of {} at N = {samples}", self.config.solver.max_iter)
        });
        Ok(CheckpointEstimate { values: sol.theta.clone(), sparse: sol.theta, warning })
    }
}

pub struct SindyEstimator {
    config: SindyConfig,
    data: BatchData,
}

impl SindyEstimator {
    pub fn new(d: usize, n: usize, config: SindyConfig) -> Self {
        Self { config, data: BatchData::new(d, n) }
    }
}

impl Estimator for SindyEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Sindy
    }

    fn update(&mut self, phi: &DVector<f64>, y_next: &DVector<f64>) -> Result<()> {
        self.data.push(phi, y_next)
    }

    fn checkpoint(&mut self) -> Result<CheckpointEstimate> {
        if self.data.phis.is_empty() {
            let zero = DMatrix::zeros(self.data.d, self.data.n);
            return Ok(CheckpointEstimate { values: zero.clone(), sparse: zero, warning: None });
        }
        let (phi, y) = self.data.matrices();
        let sol = sindy_solve(&phi, &y, self.config.threshold, self.config.max_iter)?;
        let warning = (!sol.converged).then(|| format!("sindy active set still changing after {} iterations", self.config.max_iter));
        Ok(CheckpointEstimate { values: sol.theta.clone(), sparse: sol.theta, warning })
    }
}

/// Solves the symmetric positive (semi-)definite system `g x = b`, falling back to a
/// pseudo-inverse when Cholesky fails.
pub(crate) fn solve_spd(g: DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    match g.clone().cholesky() {
        Some(chol) => chol.solve(b),
        None => g.svd(true, true).solve(b, 1e-12).unwrap_or_else(|_| DMatrix::zeros(b.nrows(), b.ncols())),
    }
}
