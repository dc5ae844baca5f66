//! Monte Carlo comparison of the estimators.
//!
//! A work unit is one `(σ², trial)` pair: its data are generated once from the trial seed
//! `base_seed + trial` and every configured algorithm then runs on the same regression
//! stream. Units run on a worker pool; results are reduced in unit order, so every
//! statistical output is independent of the worker count. Timings cover the estimator only,
//! not data generation or regressor assembly.

mod metrics;
mod report;
mod snr;

pub use metrics::{compute_ct, compute_cr, compute_pee, relative_error, support_correct};
pub use report::{BenchmarkReport, Metric, SeriesReport, TrialRecord};
pub use snr::{snr_report, ChannelSnr, SnrOptions, SnrReport};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::armax_model::{
    generate_linear_regression_trial, generate_trajectory, trial_seed, ArmaxSystem, InputGeneratorSpec, DEFAULT_TAU,
};
use crate::baselines::{EstimatorConfig, EstimatorKind};
use crate::error::{Error, Result};
use crate::identifier::regression_stream;
use crate::noise_estimator::{noise_order_margin, DEFAULT_ORDER_MARGIN};

fn default_density() -> f64 {
    0.25
}

fn default_example2_dim() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// The 10-channel ARMAX system with orders (2, 2, 2) and mixed random-walk/AR input.
    Example1,
    /// Plain sparse regression `y_k = Θᵀφ_k + w_k` with ones at random positions.
    Example2 {
        #[serde(default = "default_example2_dim")]
        d: usize,
        #[serde(default = "default_example2_dim")]
        n: usize,
        #[serde(default = "default_density")]
        density: f64,
    },
    Custom { system: ArmaxSystem, input: InputGeneratorSpec },
}

fn default_stride() -> usize {
    100
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

fn default_workers() -> usize {
    1
}

fn default_algorithms() -> Vec<EstimatorConfig> {
    EstimatorKind::ALL.into_iter().map(EstimatorConfig::default_for).collect()
}

fn default_margin() -> usize {
    DEFAULT_ORDER_MARGIN
}

fn one() -> f64 {
    1.0
}

/// Settings of the noise estimator feeding the ARMAX scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSettings {
    #[serde(default = "default_margin")]
    pub order_margin: usize,
    #[serde(default = "one")]
    pub mu: f64,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self { order_margin: DEFAULT_ORDER_MARGIN, mu: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub scenario: Scenario,
    pub sigma2_list: Vec<f64>,
    pub trials: usize,
    pub n_max: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<EstimatorConfig>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Worker threads; 0 uses every available core.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub noise: NoiseSettings,
}

impl BenchmarkConfig {
    /// Example 1 with every algorithm at its reference tuning.
    pub fn example1(sigma2_list: Vec<f64>, trials: usize, n_max: usize) -> Self {
        Self {
            scenario: Scenario::Example1,
            sigma2_list,
            trials,
            n_max,
            stride: default_stride(),
            algorithms: default_algorithms(),
            base_seed: 0,
            tau: DEFAULT_TAU,
            workers: 1,
            noise: NoiseSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.stride == 0 || self.n_max == 0 || self.n_max % self.stride != 0 {
            return Err(Error::config(format!(
                "n_max ({}) must be a positive multiple of the checkpoint stride ({})",
                self.n_max, self.stride
            )));
        }
        if self.sigma2_list.is_empty() || self.sigma2_list.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::config("sigma2_list must be a non-empty list of positive variances"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("at least one algorithm is required"));
        }
        let mut kinds: Vec<_> = self.algorithms.iter().map(EstimatorConfig::kind).collect();
        kinds.sort();
        if kinds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("each algorithm kind may appear only once"));
        }
        for a in &self.algorithms {
            a.validate()?;
        }
        if !(self.tau > 0.0) {
            return Err(Error::config("tau must be positive"));
        }
        if !(self.noise.mu > 0.0) {
            return Err(Error::config("noise mu must be positive"));
        }
        match &self.scenario {
            Scenario::Example1 => {}
            Scenario::Example2 { d, n, density } => {
                if *d == 0 || *n == 0 || !(*density > 0.0 && *density <= 1.0) {
                    return Err(Error::config("example2 needs d, n > 0 and density in (0, 1]"));
                }
            }
            Scenario::Custom { system, input } => {
                system.validate()?;
                input.validate(system.l())?;
            }
        }
        Ok(())
    }

    /// Checkpoint sample counts `h, 2h, …, n_max`.
    pub fn checkpoints(&self) -> Vec<usize> {
        (1..=self.n_max / self.stride).map(|j| j * self.stride).collect()
    }
}

/// Regression stream and truth for one work unit.
pub struct TrialData {
    pub theta: DMatrix<f64>,
    pub phis: Vec<DVector<f64>>,
    pub targets: Vec<DVector<f64>>,
}

/// Generates the data of one `(σ², trial)` unit.
pub fn trial_data(config: &BenchmarkConfig, sigma2: f64, seed: u64) -> Result<TrialData> {
    let armax = |system: &ArmaxSystem, input: &InputGeneratorSpec| -> Result<TrialData> {
        let traj = generate_trajectory(system, input, sigma2, config.n_max + 1, seed)?;
        let orders = system.orders();
        let noise_orders = noise_order_margin(orders, config.noise.order_margin)?;
        let stream = regression_stream(&traj, system.n(), system.l(), orders, noise_orders, config.noise.mu)?;
        Ok(TrialData { theta: system.theta(), phis: stream.phis, targets: stream.targets })
    };
    match &config.scenario {
        Scenario::Example1 => armax(&ArmaxSystem::example1(), &InputGeneratorSpec::example1()),
        Scenario::Custom { system, input } => armax(system, input),
        Scenario::Example2 { d, n, density } => {
            let spec = InputGeneratorSpec::half_random_walk(*d);
            let t = generate_linear_regression_trial(*d, *n, *density, &spec, sigma2, config.n_max, seed)?;
            Ok(TrialData { theta: t.theta, phis: t.phis, targets: t.ys })
        }
    }
}

/// One algorithm on one unit.
#[derive(Clone, Debug)]
pub struct AlgorithmTrace {
    pub kind: EstimatorKind,
    pub pee: Vec<f64>,
    pub correct: Vec<bool>,
    /// Seconds spent since the previous checkpoint.
    pub seconds: Vec<f64>,
    pub warnings: usize,
    pub last_support_change: Option<usize>,
}

/// Runs one estimator over a stream, checkpointing every `stride` samples.
pub fn run_algorithm(
    config: &EstimatorConfig,
    data: &TrialData,
    stride: usize,
    tau: f64,
) -> Result<AlgorithmTrace> {
    let (d, n) = data.theta.shape();
    let mut est = config.build(d, n)?;
    let mut trace = AlgorithmTrace {
        kind: config.kind(),
        pee: Vec::new(),
        correct: Vec::new(),
        seconds: Vec::new(),
        warnings: 0,
        last_support_change: None,
    };
    let mut clock = Instant::now();
    for (i, (phi, y)) in data.phis.iter().zip(&data.targets).enumerate() {
        est.update(phi, y)?;
        if (i + 1) % stride == 0 {
            let cp = est.checkpoint()?;
            trace.seconds.push(clock.elapsed().as_secs_f64());
            trace.pee.push(relative_error(&cp.values, &data.theta)?);
            trace.correct.push(support_correct(&cp.sparse, &data.theta, tau));
            trace.warnings += cp.warning.is_some() as usize;
            clock = Instant::now();
        }
    }
    trace.last_support_change = est.last_support_change();
    Ok(trace)
}

/// Outcome of one `(σ², trial)` unit: a trace or an error per algorithm.
struct UnitOutcome {
    sigma_index: usize,
    trial: usize,
    seed: u64,
    traces: Vec<(EstimatorKind, std::result::Result<AlgorithmTrace, String>)>,
}

fn run_unit(config: &BenchmarkConfig, sigma_index: usize, trial: usize) -> UnitOutcome {
    let seed = trial_seed(config.base_seed, trial as u64);
    let sigma2 = config.sigma2_list[sigma_index];
    let data = trial_data(config, sigma2, seed);
    let traces = config
        .algorithms
        .iter()
        .map(|a| {
            let result = match &data {
                Ok(data) => run_algorithm(a, data, config.stride, config.tau).map_err(|e| e.to_string()),
                Err(e) => Err(format!("data generation failed: {e}")),
            };
            (a.kind(), result)
        })
        .collect();
    UnitOutcome { sigma_index, trial, seed, traces }
}

pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let started = Instant::now();
    let units: Vec<(usize, usize)> =
        (0..config.sigma2_list.len()).flat_map(|s| (0..config.trials).map(move |t| (s, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<UnitOutcome> =
        pool.install(|| units.par_iter().map(|&(s, t)| run_unit(config, s, t)).collect());

    let mut records = Vec::new();
    for unit in outcomes {
        let sigma2 = config.sigma2_list[unit.sigma_index];
        for (algorithm, result) in unit.traces {
            let mut record = TrialRecord {
                algorithm,
                sigma2,
                trial: unit.trial,
                seed: unit.seed,
                final_pee: None,
                final_correct: None,
                last_support_change: None,
                warnings: 0,
                error: None,
            };
            let trace = match result {
                Ok(trace) => {
                    record.final_pee = trace.pee.last().copied();
                    record.final_correct = trace.correct.last().copied();
                    record.last_support_change = trace.last_support_change;
                    record.warnings = trace.warnings;
                    Some(trace)
                }
                Err(msg) => {
                    record.error = Some(msg);
                    None
                }
            };
            records.push((unit.sigma_index, record, trace));
        }
    }
    Ok(report::aggregate(config, records, started.elapsed().as_secs_f64()))
}
