//! Per-channel signal-to-noise ratios by separate simulation of the input-driven and the
//! noise-driven parts of the output.
//!
//! Variances are ensemble variances over independent replicate paths, averaged over a
//! trailing window of time steps ending at the probe time. The ensemble matters for
//! non-stationary channels such as a random-walk input, whose variance grows with time.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::armax_model::{simulate_step, ArmaxSystem, InputGenerator, InputGeneratorSpec, NoiseGenerator, SimulationHistory};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrOptions {
    pub replicates: usize,
    /// Number of time steps, ending at the probe time, over which variances are averaged.
    pub window: usize,
    pub seed: u64,
}

impl Default for SnrOptions {
    fn default() -> Self {
        Self { replicates: 200, window: 1, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSnr {
    pub channel: usize,
    pub signal_variance: f64,
    pub noise_variance: f64,
    /// `None` when the noise variance is zero (infinite ratio).
    pub snr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub sigma2: f64,
    pub probe: usize,
    pub options: SnrOptions,
    pub channels: Vec<ChannelSnr>,
}

/// Running per-channel ensemble moments at each time of the window.
struct WindowMoments {
    sum: Vec<DVector<f64>>,
    sum_sq: Vec<DVector<f64>>,
}

impl WindowMoments {
    fn new(window: usize, n: usize) -> Self {
        Self { sum: vec![DVector::zeros(n); window], sum_sq: vec![DVector::zeros(n); window] }
    }

    fn add(&mut self, slot: usize, y: &DVector<f64>) {
        self.sum[slot] += y;
        self.sum_sq[slot] += y.component_mul(y);
    }

    /// Window average of the unbiased ensemble variance.
    fn variance(&self, replicates: usize) -> DVector<f64> {
        let r = replicates as f64;
        let n = self.sum[0].len();
        let mut out = DVector::zeros(n);
        for (s, q) in self.sum.iter().zip(&self.sum_sq) {
            for i in 0..n {
                let mean = s[i] / r;
                out[i] += ((q[i] - r * mean * mean) / (r - 1.0)).max(0.0);
            }
        }
        out / self.sum.len() as f64
    }
}

/// Simulates `probe` steps from the zero state with the given input and noise sources,
/// recording outputs in the trailing window.
fn simulate_path(
    system: &ArmaxSystem,
    mut input: Option<InputGenerator>,
    mut noise: Option<NoiseGenerator>,
    probe: usize,
    moments: &mut WindowMoments,
) -> Result<()> {
    let (n, l) = (system.n(), system.l());
    let window = moments.sum.len();
    let mut history = SimulationHistory::new(system);
    let zero_u = DVector::zeros(l);
    let zero_w = DVector::zeros(n);
    for k in 0..probe {
        let u = input.as_ref().map_or(zero_u.clone(), |g| g.current().clone());
        let w = noise.as_mut().map_or(zero_w.clone(), |g| g.next_vector());
        let y = simulate_step(system, &history, &u, &w)?;
        history.advance(&y, &u, &w);
        if let Some(g) = input.as_mut() {
            g.advance();
        }
        // y is y_{k+1}
        let time = k + 1;
        if time + window > probe {
            moments.add(time + window - probe - 1, &y);
        }
    }
    Ok(())
}

pub fn snr_report(
    system: &ArmaxSystem,
    input_spec: &InputGeneratorSpec,
    sigma2: f64,
    probe: usize,
    options: &SnrOptions,
) -> Result<SnrReport> {
    if options.replicates < 2 {
        return Err(Error::config("snr needs at least two replicates"));
    }
    if options.window == 0 || options.window > probe {
        return Err(Error::config(format!("snr window must lie in 1..={probe}")));
    }
    let (n, l) = (system.n(), system.l());
    let mut signal = WindowMoments::new(options.window, n);
    let mut noise = WindowMoments::new(options.window, n);
    for rep in 0..options.replicates {
        let seed = options.seed.wrapping_add(rep as u64);
        let input = InputGenerator::new(input_spec, l, seed)?;
        simulate_path(system, Some(input), None, probe, &mut signal)?;
        let w = NoiseGenerator::new(sigma2, n, seed)?;
        simulate_path(system, None, Some(w), probe, &mut noise)?;
    }
    let sv = signal.variance(options.replicates);
    let nv = noise.variance(options.replicates);
    let channels = (0..n)
        .map(|i| ChannelSnr {
            channel: i,
            signal_variance: sv[i],
            noise_variance: nv[i],
            snr: (nv[i] > 0.0).then(|| sv[i] / nv[i]),
        })
        .collect();
    Ok(SnrReport { sigma2, probe, options: options.clone(), channels })
}
