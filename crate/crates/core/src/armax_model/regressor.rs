use nalgebra::DVector;

use super::ModelOrders;
use crate::error::{Error, Result};

/// Builds `φ⁰_k = [y_kᵀ … y_{k−p+1}ᵀ, u_kᵀ … u_{k−q+1}ᵀ, w_kᵀ … w_{k−r+1}ᵀ]ᵀ`.
///
/// Each history slice is ordered newest first (`ys[0] = y_k`). Histories shorter than the
/// corresponding order are zero-padded; longer ones are truncated.
pub fn build_phi0(
    orders: ModelOrders,
    n: usize,
    l: usize,
    ys: &[DVector<f64>],
    us: &[DVector<f64>],
    ws: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let mut phi = DVector::zeros(orders.regressor_dim(n, l));
    let mut at = 0;
    for (hist, lags, width, name) in [(ys, orders.p, n, "y"), (us, orders.q, l, "u"), (ws, orders.r, n, "w")] {
        for i in 0..lags {
            if let Some(v) = hist.get(i) {
                if v.len() != width {
                    return Err(Error::invalid(format!(
                        "{name} history entry {i} has length {}, expected {width}",
                        v.len()
                    )));
                }
                phi.rows_mut(at, width).copy_from(v);
            }
            at += width;
        }
    }
    Ok(phi)
}
