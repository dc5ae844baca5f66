//! Sequentially thresholded least squares.

use nalgebra::{DMatrix, DVector};

use super::solve_spd;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SindySolution {
    pub theta: DMatrix<f64>,
    /// Largest iteration count over the columns.
    pub iterations: usize,
    /// False when some column's active set was still shrinking at the cap.
    pub converged: bool,
    /// Per column, the active-set size at the start of each iteration.
    pub active_sizes: Vec<Vec<usize>>,
}

/// Per column: least squares on the active set, then drop coefficients with magnitude below
/// `threshold`, until the active set stops changing or `max_iter` rounds have run. Rows of
/// `phi` and `y` are samples.
pub fn sindy_solve(phi: &DMatrix<f64>, y: &DMatrix<f64>, threshold: f64, max_iter: usize) -> Result<SindySolution> {
    if phi.nrows() != y.nrows() {
        return Err(Error::invalid(format!("{} regressor rows but {} output rows", phi.nrows(), y.nrows())));
    }
    sindy_solve_gram(&phi.tr_mul(phi), &phi.tr_mul(y), threshold, max_iter)
}

/// [`sindy_solve`] from `G = ΦᵀΦ` and `B = ΦᵀY`.
pub fn sindy_solve_gram(
    gram: &DMatrix<f64>,
    cross: &DMatrix<f64>,
    threshold: f64,
    max_iter: usize,
) -> Result<SindySolution> {
    let d = gram.nrows();
    if gram.ncols() != d || cross.nrows() != d {
        return Err(Error::invalid("gram and cross-product shapes disagree"));
    }
    if max_iter == 0 || !(threshold >= 0.0) {
        return Err(Error::invalid("sindy needs max_iter > 0 and threshold >= 0"));
    }
    let n = cross.ncols();
    let mut theta = DMatrix::zeros(d, n);
    let mut iterations = 0;
    let mut converged = true;
    let mut active_sizes = Vec::with_capacity(n);
    for t in 0..n {
        let b = cross.column(t).clone_owned();
        let mut active: Vec<usize> = (0..d).collect();
        let mut sizes = Vec::new();
        let mut values = DVector::zeros(0);
        let mut stable = false;
        let mut rounds = 0;
        while rounds < max_iter {
            rounds += 1;
            sizes.push(active.len());
            if active.is_empty() {
                stable = true;
                break;
            }
            values = restricted_ls(gram, &b, &active);
            let kept: Vec<usize> =
                active.iter().zip(values.iter()).filter(|(_, v)| v.abs() >= threshold).map(|(i, _)| *i).collect();
            if kept.len() == active.len() {
                stable = true;
                break;
            }
            active = kept;
        }
        if !stable {
            values = if active.is_empty() { DVector::zeros(0) } else { restricted_ls(gram, &b, &active) };
        }
        for (i, v) in active.iter().zip(values.iter()) {
            theta[(*i, t)] = *v;
        }
        iterations = iterations.max(rounds);
        converged &= stable;
        active_sizes.push(sizes);
    }
    Ok(SindySolution { theta, iterations, converged, active_sizes })
}

fn restricted_ls(gram: &DMatrix<f64>, b: &DVector<f64>, active: &[usize]) -> DVector<f64> {
    let g = gram.select_rows(active).select_columns(active);
    let rhs = DMatrix::from_column_slice(active.len(), 1, b.select_rows(active).as_slice());
    solve_spd(g, &rhs).column(0).clone_owned()
}
