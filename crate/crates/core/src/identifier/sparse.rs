use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::armax_model::IndexSet;
use crate::linalg::{serde_matrix, sgn};

/// Soft-thresholding `S_γ(y) = sgn(y) · max(|y| − γ, 0)`, the minimizer of
/// `½(y − x)² + γ|x|`.
#[inline]
pub fn soft_threshold(y: f64, gamma: f64) -> f64 {
    sgn(y) * (y.abs() - gamma).max(0.0)
}

/// Element-wise [`soft_threshold`] with a common threshold.
pub fn soft_threshold_matrix(y: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    y.map(|v| soft_threshold(v, gamma))
}

/// Which matrix supplies the values on the estimated support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SparseMode {
    #[default]
    ThetaValues,
    XiValues,
}

/// `S_{N+1}`: values on the complement of `A(Ξ_{N+1})`, exact zeros on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseEstimate {
    #[serde(with = "serde_matrix::row_major")]
    pub s: DMatrix<f64>,
    pub zero_set: IndexSet,
    pub mode: SparseMode,
}

pub fn extract_sparse(theta: &DMatrix<f64>, xi: &DMatrix<f64>, mode: SparseMode) -> SparseEstimate {
    let zero_set = IndexSet::zeros_of(xi);
    let source = match mode {
        SparseMode::ThetaValues => theta,
        SparseMode::XiValues => xi,
    };
    let s = DMatrix::from_fn(xi.nrows(), xi.ncols(), |i, j| if xi[(i, j)] == 0.0 { 0.0 } else { source[(i, j)] });
    SparseEstimate { s, zero_set, mode }
}
