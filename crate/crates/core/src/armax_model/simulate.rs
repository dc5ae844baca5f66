//! Trajectory simulation and the synthetic data generators.
//!
//! Randomness comes from ChaCha8 streams. A trajectory seed drives two independent streams
//! (inputs and noise), so changing the noise variance leaves the input path untouched and
//! trials never share state. Gaussian draws use `rand_distr::StandardNormal` (ziggurat).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ArmaxSystem, Observation, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::LagBuffer;

const INPUT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const SUPPORT_STREAM: u64 = 3;

/// Per-trial seed: `base + trial` (wrapping), so serial and parallel runs agree.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base.wrapping_add(trial)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Random walk on `random_walk_dims`, AR(1) with `ar_coefficient` elsewhere.
    Example1Mixed,
    RandomWalk,
    Ar1,
    White,
}

fn default_ar() -> f64 {
    0.5
}

fn default_rw_dims() -> Vec<usize> {
    vec![0]
}

/// Input (or regressor) generator `u_{k+1}(i) = c_i u_k(i) + v_{k+1}(i)`, `v ~ N(0, I)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputGeneratorSpec {
    pub kind: InputKind,
    #[serde(default = "default_ar")]
    pub ar_coefficient: f64,
    /// Zero-based coordinates that follow a random walk (`example1_mixed` only).
    #[serde(default = "default_rw_dims")]
    pub random_walk_dims: Vec<usize>,
    /// Mixed into the trajectory seed for the input stream.
    #[serde(default)]
    pub seed: u64,
}

impl Default for InputGeneratorSpec {
    fn default() -> Self {
        Self::example1()
    }
}

impl InputGeneratorSpec {
    /// First coordinate a random walk, the rest AR(0.5).
    pub fn example1() -> Self {
        Self { kind: InputKind::Example1Mixed, ar_coefficient: 0.5, random_walk_dims: vec![0], seed: 0 }
    }

    /// First half of the coordinates random walks, second half AR(0.5).
    pub fn half_random_walk(dim: usize) -> Self {
        Self {
            kind: InputKind::Example1Mixed,
            ar_coefficient: 0.5,
            random_walk_dims: (0..dim / 2).collect(),
            seed: 0,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.kind {
            InputKind::Ar1 | InputKind::Example1Mixed if !(self.ar_coefficient.abs() < 1.0) => {
                Err(Error::config(format!("ar_coefficient {} must lie in (-1, 1)", self.ar_coefficient)))
            }
            InputKind::Example1Mixed if self.random_walk_dims.iter().any(|&i| i >= dim) => {
                Err(Error::config(format!("random_walk_dims must be < {dim}")))
            }
            _ => Ok(()),
        }
    }

    fn coefficients(&self, dim: usize) -> Vec<f64> {
        match self.kind {
            InputKind::RandomWalk => vec![1.0; dim],
            InputKind::Ar1 => vec![self.ar_coefficient; dim],
            InputKind::White => vec![0.0; dim],
            InputKind::Example1Mixed => {
                let mut c = vec![self.ar_coefficient; dim];
                for &i in &self.random_walk_dims {
                    c[i] = 1.0;
                }
                c
            }
        }
    }
}

/// Stateful input generator started from the zero state.
#[derive(Clone, Debug)]
pub struct InputGenerator {
    coefs: Vec<f64>,
    state: DVector<f64>,
    rng: ChaCha8Rng,
}

impl InputGenerator {
    pub fn new(spec: &InputGeneratorSpec, dim: usize, seed: u64) -> Result<Self> {
        spec.validate(dim)?;
        Ok(Self {
            coefs: spec.coefficients(dim),
            state: DVector::zeros(dim),
            rng: stream_rng(seed.wrapping_add(spec.seed), INPUT_STREAM),
        })
    }

    pub fn current(&self) -> &DVector<f64> {
        &self.state
    }

    /// Moves to the next value and returns it.
    pub fn advance(&mut self) -> &DVector<f64> {
        for (x, c) in self.state.iter_mut().zip(&self.coefs) {
            let v: f64 = self.rng.sample(StandardNormal);
            *x = c * *x + v;
        }
        &self.state
    }
}

/// i.i.d. `N(0, σ² I)` vectors.
#[derive(Clone, Debug)]
pub struct NoiseGenerator {
    sigma: f64,
    dim: usize,
    rng: ChaCha8Rng,
}

impl NoiseGenerator {
    pub fn new(sigma2: f64, dim: usize, seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::config(format!("noise variance {sigma2} must be finite and >= 0")));
        }
        Ok(Self { sigma: sigma2.sqrt(), dim, rng: stream_rng(seed, NOISE_STREAM) })
    }

    pub fn next_vector(&mut self) -> DVector<f64> {
        let sigma = self.sigma;
        let rng = &mut self.rng;
        DVector::from_fn(self.dim, |_, _| {
            let z: f64 = rng.sample(StandardNormal);
            if sigma == 0.0 {
                0.0
            } else {
                sigma * z
            }
        })
    }
}

/// Past values needed to advance an ARMAX system by one step.
///
/// Holds `y_k, …, y_{k−p+1}`, the previous inputs `u_{k−1}, …, u_{k−q+1}` and
/// `w_k, …, w_{k−r+1}`; everything before time zero reads as zero.
#[derive(Clone, Debug)]
pub struct SimulationHistory {
    ys: LagBuffer,
    us: LagBuffer,
    ws: LagBuffer,
}

impl SimulationHistory {
    pub fn new(system: &ArmaxSystem) -> Self {
        let o = system.orders();
        Self {
            ys: LagBuffer::new(o.p, system.n()),
            us: LagBuffer::new(o.q.saturating_sub(1), system.l()),
            ws: LagBuffer::new(o.r, system.n()),
        }
    }

    /// Records `(y_{k+1}, u_k, w_{k+1})` after a step.
    pub fn advance(&mut self, y_next: &DVector<f64>, u_k: &DVector<f64>, w_next: &DVector<f64>) {
        self.ys.push(y_next);
        self.us.push(u_k);
        self.ws.push(w_next);
    }
}

/// `y_{k+1} = −Σ A_i y_{k+1−i} + Σ B_j u_{k+1−j} + w_{k+1} + Σ C_ν w_{k+1−ν}`.
pub fn simulate_step(
    system: &ArmaxSystem,
    history: &SimulationHistory,
    u_k: &DVector<f64>,
    w_next: &DVector<f64>,
) -> Result<DVector<f64>> {
    if u_k.len() != system.l() || w_next.len() != system.n() {
        return Err(Error::invalid(format!(
            "input/noise lengths {}/{} do not match system (l = {}, n = {})",
            u_k.len(),
            w_next.len(),
            system.l(),
            system.n()
        )));
    }
    let mut y = w_next.clone();
    for (i, a) in system.a_blocks().iter().enumerate() {
        y.gemv(-1.0, a, history.ys.get(i), 1.0);
    }
    for (j, b) in system.b_blocks().iter().enumerate() {
        let u = if j == 0 { u_k } else { history.us.get(j - 1) };
        y.gemv(1.0, b, u, 1.0);
    }
    for (v, c) in system.c_blocks().iter().enumerate() {
        y.gemv(1.0, c, history.ws.get(v), 1.0);
    }
    Ok(y)
}

/// Simulates `len` observations `k = 0..len` from the zero state.
///
/// `u_0 = 0`, `y_0 = 0`, `w_0 = 0`; thereafter `w_{k+1} ~ N(0, σ² I)` and the input follows
/// `input_spec`. The noise sequence is retained in the trajectory.
pub fn generate_trajectory(
    system: &ArmaxSystem,
    input_spec: &InputGeneratorSpec,
    noise_sigma2: f64,
    len: usize,
    seed: u64,
) -> Result<Trajectory> {
    if len == 0 {
        return Err(Error::config("trajectory length must be at least 1"));
    }
    let (n, l) = (system.n(), system.l());
    let mut inputs = InputGenerator::new(input_spec, l, seed)?;
    let mut noise = NoiseGenerator::new(noise_sigma2, n, seed)?;
    let mut history = SimulationHistory::new(system);

    let mut observations = Vec::with_capacity(len);
    let mut true_noise = Vec::with_capacity(len);
    let mut y = DVector::zeros(n);
    let mut w = DVector::zeros(n);
    for k in 0..len {
        let u = inputs.current().clone();
        observations.push(Observation { k, u: u.clone(), y: y.clone() });
        true_noise.push(w.clone());
        if k + 1 == len {
            break;
        }
        w = noise.next_vector();
        y = simulate_step(system, &history, &u, &w)?;
        history.advance(&y, &u, &w);
        inputs.advance();
    }
    Ok(Trajectory { observations, true_noise: Some(true_noise) })
}

/// Samples for the plain regression model `y_k = Θᵀ φ_k + w_k`.
#[derive(Clone, Debug)]
pub struct RegressionTrial {
    pub theta: DMatrix<f64>,
    /// `φ_1, …, φ_N`.
    pub phis: Vec<DVector<f64>>,
    pub ys: Vec<DVector<f64>>,
    pub noise: Vec<DVector<f64>>,
}

/// High-dimensional sparse regression data.
///
/// `round(density · d · n)` entries of `Θ` are set to one at uniformly random positions; the
/// regressors follow `regressor_spec` from the zero state.
pub fn generate_linear_regression_trial(
    d: usize,
    n: usize,
    density: f64,
    regressor_spec: &InputGeneratorSpec,
    noise_sigma2: f64,
    len: usize,
    seed: u64,
) -> Result<RegressionTrial> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::config(format!("density {density} must lie in (0, 1]")));
    }
    if d == 0 || n == 0 {
        return Err(Error::config("d and n must be positive"));
    }
    let total = d * n;
    let count = ((density * total as f64).round() as usize).clamp(1, total);
    let mut support_rng = stream_rng(seed, SUPPORT_STREAM);
    let mut theta = DMatrix::zeros(d, n);
    for idx in rand::seq::index::sample(&mut support_rng, total, count) {
        // column-major position
        theta[(idx % d, idx / d)] = 1.0;
    }

    let mut regressors = InputGenerator::new(regressor_spec, d, seed)?;
    let mut noise = NoiseGenerator::new(noise_sigma2, n, seed)?;
    let theta_t = theta.transpose();
    let mut phis = Vec::with_capacity(len);
    let mut ys = Vec::with_capacity(len);
    let mut ws = Vec::with_capacity(len);
    for _ in 0..len {
        let phi = regressors.advance().clone();
        let w = noise.next_vector();
        let y = &theta_t * &phi + &w;
        phis.push(phi);
        ys.push(y);
        ws.push(w);
    }
    Ok(RegressionTrial { theta, phis, ys, noise: ws })
}
