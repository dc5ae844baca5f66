use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sparse_armax::armax_model::{
    generate_trajectory, write_trajectory_csv, ArmaxSystem, InputGeneratorSpec, ModelOrders, TrajectoryCsvReader,
};
use sparse_armax::benchmark::{run_benchmark, snr_report, BenchmarkConfig, BenchmarkReport, Metric, Scenario, SnrOptions};
use sparse_armax::identifier::{ArmaxIdentifier, ArmaxIdentifierConfig};
use sparse_armax::{Error, Result};

fn default_scenario() -> Scenario {
    Scenario::Example1
}

fn default_sigma2() -> f64 {
    0.5
}

fn default_length() -> usize {
    1000
}

fn yes() -> bool {
    true
}

fn ten() -> usize {
    10
}

fn default_stride() -> usize {
    100
}

fn default_model() -> ArmaxIdentifierConfig {
    ArmaxIdentifierConfig::new(ModelOrders::new(2, 2, 2))
}

fn default_snr_sigmas() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    /// Number of observations `k = 0..length`.
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub include_noise: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyConfig {
    #[serde(default = "ten")]
    pub n: usize,
    #[serde(default = "ten")]
    pub l: usize,
    /// Updates between snapshots.
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_model")]
    pub model: ArmaxIdentifierConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrConfig {
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    #[serde(default = "default_snr_sigmas")]
    pub sigma2_list: Vec<f64>,
    /// Time step at which the variances are evaluated.
    #[serde(default = "default_length")]
    pub probe: usize,
    #[serde(default)]
    pub options: SnrOptions,
}

pub fn simulate_defaults() -> Value {
    json!({
        "scenario": {"kind": "example1"},
        "sigma2": default_sigma2(),
        "length": default_length(),
        "seed": 0,
        "include_noise": true,
    })
}

pub fn identify_defaults() -> Value {
    serde_json::to_value(IdentifyConfig { n: 10, l: 10, stride: default_stride(), model: default_model() })
        .expect("default identify config serializes")
}

pub fn benchmark_defaults() -> Value {
    serde_json::to_value(BenchmarkConfig::example1(vec![0.5], 1, 1000)).expect("default benchmark config serializes")
}

pub fn snr_defaults() -> Value {
    serde_json::to_value(SnrConfig {
        scenario: Scenario::Example1,
        sigma2_list: default_snr_sigmas(),
        probe: default_length(),
        options: SnrOptions::default(),
    })
    .expect("default snr config serializes")
}

/// System and input of an ARMAX scenario; the plain-regression scenario has neither.
fn armax_scenario(scenario: &Scenario) -> Result<(ArmaxSystem, InputGeneratorSpec)> {
    match scenario {
        Scenario::Example1 => Ok((ArmaxSystem::example1(), InputGeneratorSpec::example1())),
        Scenario::Custom { system, input } => {
            system.validate().map_err(|e| Error::Config(e.to_string()))?;
            input.validate(system.l())?;
            Ok((system.clone(), input.clone()))
        }
        Scenario::Example2 { .. } => {
            Err(Error::Config("example2 is a plain regression scenario and has no ARMAX trajectory".into()))
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn row_major(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn simulate(cfg: &SimulateConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if !(cfg.sigma2 >= 0.0) || !cfg.sigma2.is_finite() {
        return Err(Error::Config(format!("sigma2 must be a non-negative number, got {}", cfg.sigma2)));
    }
    let (system, input) = armax_scenario(&cfg.scenario)?;
    let traj = generate_trajectory(&system, &input, cfg.sigma2, cfg.length, cfg.seed)?;
    fs::create_dir_all(out)?;
    let csv_path = out.join("trajectory.csv");
    write_trajectory_csv(io::BufWriter::new(fs::File::create(&csv_path)?), &traj, cfg.include_noise)?;
    let sidecar = out.join("trajectory.json");
    write_json(
        &sidecar,
        &json!({
            "seed": cfg.seed,
            "sigma2": cfg.sigma2,
            "length": cfg.length,
            "n": system.n(),
            "l": system.l(),
            "orders": system.orders(),
            "theta": row_major(&system.theta()),
            "system": system,
            "input": input,
        }),
    )?;
    Ok(vec![csv_path, sidecar])
}

/// Streams `(u_k, y_k)` rows into the identifier, writing `snapshot_{N}.json` after every
/// `stride` updates plus the initial and final states.
pub fn identify<R: Read>(cfg: &IdentifyConfig, input: R, out: &Path) -> Result<Vec<PathBuf>> {
    if cfg.stride == 0 {
        return Err(Error::Config("stride must be positive".into()));
    }
    let mut ident = ArmaxIdentifier::new(cfg.n, cfg.l, cfg.model.clone()).map_err(|e| Error::Config(e.to_string()))?;
    let mut reader = TrajectoryCsvReader::new(input)?;
    let header = reader.header();
    if header.n != cfg.n || header.l != cfg.l {
        return Err(Error::Data(format!(
            "input has n = {}, l = {} but the config declares n = {}, l = {}",
            header.n, header.l, cfg.n, cfg.l
        )));
    }
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let snapshot = |ident: &ArmaxIdentifier, written: &mut Vec<PathBuf>| -> Result<()> {
        let snap = ident.identifier().snapshot();
        let path = out.join(format!("snapshot_{}.json", snap.step));
        write_json(&path, &snap)?;
        written.push(path);
        Ok(())
    };
    snapshot(&ident, &mut written)?;
    let mut last_written = 0;
    while let Some(row) = reader.next_row() {
        let (obs, _) = row?;
        if ident.observe(&obs.u, &obs.y)? {
            let step = ident.identifier().step();
            if step % cfg.stride == 0 {
                snapshot(&ident, &mut written)?;
                last_written = step;
            }
        }
    }
    if ident.identifier().step() != last_written {
        snapshot(&ident, &mut written)?;
    }
    Ok(written)
}

pub fn benchmark(cfg: &BenchmarkConfig, out: &Path) -> Result<(BenchmarkReport, Vec<PathBuf>)> {
    let report = run_benchmark(cfg)?;
    let paths = report.write_files(out)?;
    Ok((report, paths))
}

/// Final-checkpoint values with algorithms as rows and noise variances as columns.
pub fn summary_table(report: &BenchmarkReport) -> String {
    let n = report.checkpoints.last().copied().unwrap_or(0);
    let sigmas = &report.config.sigma2_list;
    let mut s = String::new();
    for metric in Metric::ALL {
        s.push_str(&format!("{} at N = {n}\n", metric.as_str().to_uppercase()));
        s.push_str(&format!("{:<10}", "algorithm"));
        for sigma2 in sigmas {
            s.push_str(&format!(" {:>24}", format!("sigma2={sigma2}")));
        }
        s.push('\n');
        for alg in &report.config.algorithms {
            let kind = alg.kind();
            s.push_str(&format!("{:<10}", kind.as_str()));
            for &sigma2 in sigmas {
                let cell = report.final_value(kind, sigma2, metric).map_or("n/a".to_string(), |v| v.to_string());
                s.push_str(&format!(" {cell:>24}"));
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

pub fn snr(cfg: &SnrConfig, out: &Path) -> Result<(String, PathBuf)> {
    let (system, input) = armax_scenario(&cfg.scenario)?;
    if cfg.sigma2_list.is_empty() || cfg.sigma2_list.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::Config("sigma2_list must be a non-empty list of non-negative variances".into()));
    }
    let reports = cfg
        .sigma2_list
        .iter()
        .map(|&s| snr_report(&system, &input, s, cfg.probe, &cfg.options))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out)?;
    let path = out.join("snr.json");
    write_json(&path, &reports)?;

    let mut table = format!("{:<8}", "channel");
    for r in &reports {
        table.push_str(&format!(" {:>24}", format!("sigma2={}", r.sigma2)));
    }
    table.push('\n');
    for ch in 0..system.n() {
        table.push_str(&format!("{:<8}", ch + 1));
        for r in &reports {
            let cell = r.channels[ch].snr.map_or("inf".to_string(), |v| v.to_string());
            table.push_str(&format!(" {cell:>24}"));
        }
        table.push('\n');
    }
    Ok((table, path))
}

pub fn print_paths(paths: &[PathBuf]) {
    let mut err = io::stderr().lock();
    for p in paths {
        let _ = writeln!(err, "wrote {}", p.display());
    }
}
