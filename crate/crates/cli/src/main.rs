//! `sparse-armax`: simulate ARMAX trajectories, identify them from a stream, run Monte Carlo
//! benchmarks and report signal-to-noise ratios.
//!
//! Every subcommand reads an optional JSON config (`--config`), then applies `--set key=value`
//! overrides (dotted paths, values parsed as JSON when possible) and finally dedicated flags.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 data error, 3 incomplete benchmark.

mod commands;
mod config;

use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use sparse_armax::benchmark::BenchmarkConfig;
use sparse_armax::Error;

#[derive(Parser, Debug)]
#[command(name = "sparse-armax", version, about = "Sparse identification of multivariate ARMAX systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file; built-in defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override a config value, e.g. `--set sigma2_list=[0.5,2]` or `--set algorithms.0.mu=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a trajectory and write `trajectory.csv` plus a `trajectory.json` sidecar.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
    },
    /// Identify a system from a trajectory CSV, writing `snapshot_{N}.json` files.
    Identify {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV; reads stdin when omitted or `-`.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Updates between snapshots.
        #[arg(long, value_name = "H")]
        stride: Option<usize>,
    },
    /// Run a Monte Carlo benchmark and write the report and metric CSVs.
    Benchmark {
        #[command(flatten)]
        common: Common,
        /// Base seed of the trial seeds.
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        /// Updates between checkpoints.
        #[arg(long, value_name = "H")]
        stride: Option<usize>,
        /// Worker threads (0 = all cores). `SPARSE_ARMAX_WORKERS` applies when neither the
        /// config nor this flag sets it.
        #[arg(long, value_name = "K")]
        workers: Option<usize>,
    },
    /// Per-channel signal-to-noise ratios of a scenario.
    Snr {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Data(_) | Error::Csv(_) | Error::Schedule(_) | Error::Metric(_) => 2,
        _ => 1,
    }
}

fn flag<T: serde::Serialize>(key: &'static str, v: Option<T>) -> Option<(&'static str, Value)> {
    v.map(|v| (key, serde_json::to_value(v).expect("flag values serialize")))
}

fn env_workers() -> Result<Option<usize>, Error> {
    match std::env::var("SPARSE_ARMAX_WORKERS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("SPARSE_ARMAX_WORKERS must be a non-negative integer, got '{v}'"))),
        _ => Ok(None),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate { common, seed } => {
            let flags: Vec<_> = flag("seed", seed).into_iter().collect();
            let cfg: commands::SimulateConfig =
                config::load(common.config.as_deref(), commands::simulate_defaults(), &common.set, &[], &flags)?;
            let paths = commands::simulate(&cfg, &common.out)?;
            commands::print_paths(&paths);
            Ok(0)
        }
        Command::Identify { common, input, stride } => {
            let flags: Vec<_> = flag("stride", stride).into_iter().collect();
            let cfg: commands::IdentifyConfig =
                config::load(common.config.as_deref(), commands::identify_defaults(), &common.set, &[], &flags)?;
            let paths = match input.filter(|p| p.as_os_str() != "-") {
                Some(path) => {
                    let file = fs::File::open(&path)
                        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
                    commands::identify(&cfg, io::BufReader::new(file), &common.out)?
                }
                None => commands::identify(&cfg, io::stdin().lock(), &common.out)?,
            };
            commands::print_paths(&paths);
            Ok(0)
        }
        Command::Benchmark { common, seed, stride, workers } => {
            let flags: Vec<_> =
                [flag("base_seed", seed), flag("stride", stride), flag("workers", workers)].into_iter().flatten().collect();
            let fallbacks: Vec<_> = flag("workers", env_workers()?).into_iter().collect();
            let mut defaults = commands::benchmark_defaults();
            if let Value::Object(map) = &mut defaults {
                map.remove("workers");
            }
            let cfg: BenchmarkConfig =
                config::load(common.config.as_deref(), defaults, &common.set, &fallbacks, &flags)?;
            cfg.validate()?;
            let (report, paths) = commands::benchmark(&cfg, &common.out)?;
            print!("{}", commands::summary_table(&report));
            commands::print_paths(&paths);
            if report.complete {
                Ok(0)
            } else {
                eprintln!("{} trial runs failed and were excluded; see report.json", report.excluded);
                Ok(3)
            }
        }
        Command::Snr { common, seed } => {
            let flags: Vec<_> = flag("options.seed", seed).into_iter().collect();
            let cfg: commands::SnrConfig =
                config::load(common.config.as_deref(), commands::snr_defaults(), &common.set, &[], &flags)?;
            let (table, path) = commands::snr(&cfg, &common.out)?;
            print!("{table}");
            commands::print_paths(&[path]);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
