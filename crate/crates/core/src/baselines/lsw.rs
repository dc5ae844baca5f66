//! Least squares with weighted L1 regularization, solved per column by monotone FISTA.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::solve_spd;
use crate::error::{Error, Result};
use crate::identifier::{soft_threshold, EPSILON_FLOOR};
use crate::linalg::symmetric_extremes;

fn default_max_iter() -> usize {
    10_000
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LswOptions {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Stop when an accepted step changes the iterate by less than `tol · ‖x‖`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Keep the objective value after every accepted step.
    #[serde(default)]
    pub record_objective: bool,
}

impl Default for LswOptions {
    fn default() -> Self {
        Self { max_iter: default_max_iter(), tol: default_tol(), record_objective: false }
    }
}

impl LswOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::config("lsw solver needs max_iter > 0 and tol > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LswSolution {
    pub theta: DMatrix<f64>,
    /// Largest iteration count over the columns.
    pub iterations: usize,
    /// False when some column stopped at the iteration cap.
    pub converged: bool,
    /// Per column, the objective `½xᵀGx − bᵀx + Σ w|x|` after each accepted step.
    pub objective_history: Vec<Vec<f64>>,
}

/// Minimizes `½‖Y(t) − Φx‖² + Σ_s λ/|θ̂(s,t)| · |x(s)|` for every column `t`, where `θ̂` is the
/// ridge estimate `(ΦᵀΦ + ridge_mu·I)⁻¹ΦᵀY`. Rows of `phi` and `y` are samples.
pub fn lsw_solve(
    phi: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lambda: f64,
    ridge_mu: f64,
    opts: &LswOptions,
) -> Result<LswSolution> {
    if phi.nrows() != y.nrows() {
        return Err(Error::invalid(format!("{} regressor rows but {} output rows", phi.nrows(), y.nrows())));
    }
    let gram = phi.tr_mul(phi);
    let cross = phi.tr_mul(y);
    lsw_solve_gram(&gram, &cross, lambda, ridge_mu, opts)
}

/// [`lsw_solve`] from the sufficient statistics `G = ΦᵀΦ` and `B = ΦᵀY`.
pub fn lsw_solve_gram(
    gram: &DMatrix<f64>,
    cross: &DMatrix<f64>,
    lambda: f64,
    ridge_mu: f64,
    opts: &LswOptions,
) -> Result<LswSolution> {
    opts.validate()?;
    let d = gram.nrows();
    if gram.ncols() != d || cross.nrows() != d {
        return Err(Error::invalid("gram and cross-product shapes disagree"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lsw lambda must be finite and >= 0, got {lambda}")));
    }
    if !(ridge_mu > 0.0) {
        return Err(Error::invalid("ridge_mu must be positive"));
    }
    let n = cross.ncols();
    let ridge = solve_spd(gram + DMatrix::identity(d, d) * ridge_mu, cross);
    let (lipschitz, _) = symmetric_extremes(gram);

    let mut theta = DMatrix::zeros(d, n);
    let mut iterations = 0;
    let mut converged = true;
    let mut objective_history = Vec::new();
    if lipschitz <= 0.0 {
        return Ok(LswSolution { theta, iterations, converged, objective_history });
    }
    for t in 0..n {
        let weights: Vec<f64> = ridge
            .column(t)
            .iter()
            .map(|r| if r.abs() <= EPSILON_FLOOR { f64::INFINITY } else { lambda / r.abs() })
            .collect();
        let start = DVector::from_fn(d, |s, _| if weights[s].is_finite() { ridge[(s, t)] } else { 0.0 });
        let b = cross.column(t).clone_owned();
        let col = mfista(gram, &b, &weights, lipschitz, start, opts);
        theta.set_column(t, &col.x);
        iterations = iterations.max(col.iterations);
        converged &= col.converged;
        objective_history.push(col.history);
    }
    Ok(LswSolution { theta, iterations, converged, objective_history })
}

struct ColumnResult {
    x: DVector<f64>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn objective(gram: &DMatrix<f64>, b: &DVector<f64>, weights: &[f64], x: &DVector<f64>) -> f64 {
    let penalty: f64 = x.iter().zip(weights).filter(|(v, _)| **v != 0.0).map(|(v, w)| w * v.abs()).sum();
    0.5 * x.dot(&(gram * x)) - b.dot(x) + penalty
}

fn prox(v: &DVector<f64>, weights: &[f64], step: f64) -> DVector<f64> {
    DVector::from_fn(v.len(), |s, _| if weights[s].is_finite() { soft_threshold(v[s], weights[s] * step) } else { 0.0 })
}

/// Monotone FISTA: a step is accepted only if it does not increase the objective; a rejected
/// step restarts the momentum from the current iterate.
fn mfista(
    gram: &DMatrix<f64>,
    b: &DVector<f64>,
    weights: &[f64],
    lipschitz: f64,
    start: DVector<f64>,
    opts: &LswOptions,
) -> ColumnResult {
    let step = 1.0 / lipschitz;
    let mut x = start;
    let mut fx = objective(gram, b, weights, &x);
    let mut yv = x.clone();
    let mut t = 1.0f64;
    let mut history = Vec::new();
    if opts.record_objective {
        history.push(fx);
    }
    let mut grad = DVector::zeros(x.len());
    let mut restarted = false;
    for it in 1..=opts.max_iter {
        grad.gemv(1.0, gram, &yv, 0.0);
        grad -= b;
        let z = prox(&(&yv - &grad * step), weights, step);
        let fz = objective(gram, b, weights, &z);
        if fz <= fx {
            let change = (&z - &x).norm();
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            yv = &z + (&z - &x) * ((t - 1.0) / t_next);
            x = z;
            fx = fz;
            t = t_next;
            restarted = false;
            if opts.record_objective {
                history.push(fx);
            }
            if change <= opts.tol * x.norm() || change == 0.0 {
                return ColumnResult { x, iterations: it, converged: true, history };
            }
        } else if restarted {
            // a plain proximal-gradient step from x cannot decrease the objective in floating
            // point any more
            return ColumnResult { x, iterations: it, converged: true, history };
        } else {
            yv.copy_from(&x);
            t = 1.0;
            restarted = true;
        }
    }
    ColumnResult { x, iterations: opts.max_iter, converged: false, history }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(seed: u64, rows: usize, d: usize, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = DMatrix::from_fn(rows, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let theta = DMatrix::from_fn(d, n, |i, j| if (i + j) % 2 == 0 { 1.0 } else { 0.0 });
        let noise = DMatrix::from_fn(rows, n, |_, _| (rng.random::<f64>() - 0.5) * 0.2);
        (phi.clone(), phi * theta + noise)
    }

    #[test]
    fn zero_lambda_is_least_squares() {
        let (phi, y) = problem(1, 80, 6, 2);
        let sol = lsw_solve(&phi, &y, 0.0, 1.0, &LswOptions::default()).unwrap();
        let ls = (phi.transpose() * &phi).cholesky().unwrap().solve(&(phi.transpose() * &y));
        assert!(sol.converged);
        assert!((sol.theta - ls).amax() < 1e-6);
    }

    #[test]
    fn objective_never_increases() {
        let (phi, y) = problem(2, 50, 8, 3);
        let opts = LswOptions { record_objective: true, ..Default::default() };
        let sol = lsw_solve(&phi, &y, 5.0, 1.0, &opts).unwrap();
        for hist in &sol.objective_history {
            assert!(hist.len() > 1);
            assert!(hist.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn iteration_cap_sets_warning_flag() {
        let (phi, y) = problem(3, 50, 8, 1);
        let opts = LswOptions { max_iter: 2, ..Default::default() };
        let sol = lsw_solve(&phi, &y, 3.0, 1.0, &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn empty_data_gives_zero() {
        let sol = lsw_solve(&DMatrix::zeros(0, 3), &DMatrix::zeros(0, 2), 1.0, 1.0, &LswOptions::default()).unwrap();
        assert_eq!(sol.theta, DMatrix::zeros(3, 2));
    }
}
