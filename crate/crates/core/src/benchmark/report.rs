use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{compute_ct, AlgorithmTrace, BenchmarkConfig};
use crate::baselines::EstimatorKind;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pee,
    Cr,
    Ct,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Pee, Metric::Cr, Metric::Ct];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Pee => "pee",
            Metric::Cr => "cr",
            Metric::Ct => "ct",
        }
    }
}

/// Trial-averaged curves for one `(algorithm, σ²)` pair, one value per checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub algorithm: EstimatorKind,
    pub sigma2: f64,
    pub pee: Vec<f64>,
    pub cr: Vec<f64>,
    /// Cumulative seconds.
    pub ct: Vec<f64>,
    pub trials_used: usize,
    pub trials_excluded: usize,
    /// Checkpoints at which an iterative solver hit its cap, summed over trials.
    pub warnings: usize,
}

impl SeriesReport {
    pub fn values(&self, metric: Metric) -> &[f64] {
        match metric {
            Metric::Pee => &self.pee,
            Metric::Cr => &self.cr,
            Metric::Ct => &self.ct,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: EstimatorKind,
    pub sigma2: f64,
    pub trial: usize,
    pub seed: u64,
    pub final_pee: Option<f64>,
    pub final_correct: Option<bool>,
    pub last_support_change: Option<usize>,
    pub warnings: usize,
    /// Set when the trial was excluded.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub checkpoints: Vec<usize>,
    pub series: Vec<SeriesReport>,
    pub trials: Vec<TrialRecord>,
    pub excluded: usize,
    /// False when any trial was excluded.
    pub complete: bool,
    pub wall_clock_seconds: f64,
}

impl BenchmarkReport {
    pub fn series_for(&self, algorithm: EstimatorKind, sigma2: f64) -> Option<&SeriesReport> {
        self.series.iter().find(|s| s.algorithm == algorithm && s.sigma2 == sigma2)
    }

    /// Value at the last checkpoint.
    pub fn final_value(&self, algorithm: EstimatorKind, sigma2: f64, metric: Metric) -> Option<f64> {
        self.series_for(algorithm, sigma2).and_then(|s| s.values(metric).last().copied())
    }

    /// Long-format CSV `algorithm,sigma2,N,value`.
    pub fn write_metric_csv<W: Write>(&self, metric: Metric, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algorithm", "sigma2", "N", "value"])?;
        for s in &self.series {
            for (n, v) in self.checkpoints.iter().zip(s.values(metric)) {
                w.write_record([s.algorithm.as_str(), &s.sigma2.to_string(), &n.to_string(), &v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn metric_csv(&self, metric: Metric) -> Result<String> {
        let mut buf = Vec::new();
        self.write_metric_csv(metric, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Final-checkpoint table `algorithm,sigma2,N,pee,cr,ct,trials_used`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algorithm", "sigma2", "N", "pee", "cr", "ct", "trials_used"])?;
        let n = self.checkpoints.last().copied().unwrap_or(0).to_string();
        for s in &self.series {
            let last = |m: Metric| s.values(m).last().map_or(String::new(), |v| v.to_string());
            w.write_record([
                s.algorithm.as_str().to_string(),
                s.sigma2.to_string(),
                n.clone(),
                last(Metric::Pee),
                last(Metric::Cr),
                last(Metric::Ct),
                s.trials_used.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `report.json`, `pee.csv`, `cr.csv`, `ct.csv` and `summary.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let json = dir.join("report.json");
        fs::write(&json, serde_json::to_string_pretty(self)?)?;
        paths.push(json);
        for metric in Metric::ALL {
            let path = dir.join(format!("{}.csv", metric.as_str()));
            self.write_metric_csv(metric, fs::File::create(&path)?)?;
            paths.push(path);
        }
        let summary = dir.join("summary.csv");
        self.write_summary_csv(fs::File::create(&summary)?)?;
        paths.push(summary);
        Ok(paths)
    }
}

/// Reduces per-unit results in their given order.
pub(super) fn aggregate(
    config: &BenchmarkConfig,
    records: Vec<(usize, TrialRecord, Option<AlgorithmTrace>)>,
    wall_clock_seconds: f64,
) -> BenchmarkReport {
    let checkpoints = config.checkpoints();
    let mut series = Vec::new();
    for (si, &sigma2) in config.sigma2_list.iter().enumerate() {
        for alg in &config.algorithms {
            let kind = alg.kind();
            let mine: Vec<&(usize, TrialRecord, Option<AlgorithmTrace>)> =
                records.iter().filter(|(s, r, _)| *s == si && r.algorithm == kind).collect();
            let traces: Vec<&AlgorithmTrace> = mine.iter().filter_map(|(_, _, t)| t.as_ref()).collect();
            let used = traces.len();
            let mean = |f: &dyn Fn(&AlgorithmTrace, usize) -> f64| -> Vec<f64> {
                if used == 0 {
                    return Vec::new();
                }
                (0..checkpoints.len())
                    .map(|j| traces.iter().map(|t| f(t, j)).sum::<f64>() / used as f64)
                    .collect()
            };
            let pee = mean(&|t, j| t.pee[j]);
            let cr = mean(&|t, j| t.correct[j] as u8 as f64);
            let ct = if used == 0 {
                Vec::new()
            } else {
                compute_ct(&traces.iter().map(|t| t.seconds.clone()).collect::<Vec<_>>())
            };
            series.push(SeriesReport {
                algorithm: kind,
                sigma2,
                pee,
                cr,
                ct,
                trials_used: used,
                trials_excluded: mine.len() - used,
                warnings: traces.iter().map(|t| t.warnings).sum(),
            });
        }
    }
    let trials: Vec<TrialRecord> = records.into_iter().map(|(_, r, _)| r).collect();
    let excluded = trials.iter().filter(|r| r.error.is_some()).count();
    BenchmarkReport {
        config: config.clone(),
        checkpoints,
        series,
        trials,
        excluded,
        complete: excluded == 0,
        wall_clock_seconds,
    }
}
