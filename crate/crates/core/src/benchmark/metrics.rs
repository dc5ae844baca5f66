use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `‖X − Θ‖_F / ‖Θ‖_F` for one estimate.
pub fn relative_error(estimate: &DMatrix<f64>, theta: &DMatrix<f64>) -> Result<f64> {
    if estimate.shape() != theta.shape() {
        return Err(Error::Metric(format!(
            "estimate is {:?} but the true parameter is {:?}",
            estimate.shape(),
            theta.shape()
        )));
    }
    let norm = theta.norm();
    if norm == 0.0 {
        return Err(Error::Metric("relative error is undefined for a zero parameter matrix".into()));
    }
    Ok((estimate - theta).norm() / norm)
}

/// Average relative Frobenius error over trials.
pub fn compute_pee(estimates: &[DMatrix<f64>], theta: &DMatrix<f64>) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Metric("no estimates to score".into()));
    }
    let mut total = 0.0;
    for x in estimates {
        total += relative_error(x, theta)?;
    }
    Ok(total / estimates.len() as f64)
}

/// Exact support recovery at threshold `tau`: `|X| < τ` on every true zero and `|X| ≥ τ`
/// everywhere else.
pub fn support_correct(estimate: &DMatrix<f64>, theta: &DMatrix<f64>, tau: f64) -> bool {
    estimate.shape() == theta.shape()
        && estimate.iter().zip(theta.iter()).all(|(x, t)| if *t == 0.0 { x.abs() < tau } else { x.abs() >= tau })
}

/// Fraction of trials with exact support recovery.
pub fn compute_cr(estimates: &[DMatrix<f64>], theta: &DMatrix<f64>, tau: f64) -> f64 {
    if estimates.is_empty() {
        return 0.0;
    }
    let hits = estimates.iter().filter(|x| support_correct(x, theta, tau)).count();
    hits as f64 / estimates.len() as f64
}

/// Cumulative computation time averaged over trials; `segments[i][j]` is the time spent by
/// trial `i` between checkpoints `j − 1` and `j`.
pub fn compute_ct(segments: &[Vec<f64>]) -> Vec<f64> {
    let Some(len) = segments.iter().map(Vec::len).max() else {
        return Vec::new();
    };
    let mut ct = vec![0.0; len];
    for trial in segments {
        let mut running = 0.0;
        for (j, slot) in ct.iter_mut().enumerate() {
            running += trial.get(j).copied().unwrap_or(0.0);
            *slot += running;
        }
    }
    let t = segments.len() as f64;
    ct.iter_mut().for_each(|v| *v /= t);
    ct
}
