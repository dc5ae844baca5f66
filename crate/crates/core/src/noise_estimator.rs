//! *A posteriori* estimates of colored system noise.
//!
//! An over-parameterized recursive least squares fit of `y_N` on
//! `ψ_{N−1} = [y_{N−1}ᵀ … y_{N−p̄}ᵀ, u_{N−1}ᵀ … u_{N−q̄}ᵀ, ŵ_{N−1}ᵀ … ŵ_{N−r̄}ᵀ]ᵀ`;
//! its residual `ŵ_N = y_N − α_Nᵀ ψ_{N−1}` stands in for the unobservable `w_N` when the
//! identifier assembles its regressor.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::armax_model::ModelOrders;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, serde_matrix, sherman_morrison_downdate, symmetric_extremes, LagBuffer};

/// Default excess order `k` in `(p + k, q + k, r + k)`.
pub const DEFAULT_ORDER_MARGIN: usize = 2;

/// Over-parameterized orders `(p + k, q + k, r + k)`.
///
/// The theoretical lower bound on `k` depends on constants of `C⁻¹(z)` that are unknown in
/// practice, so `k` is a plain knob; it must be positive.
pub fn noise_order_margin(true_orders: ModelOrders, k: usize) -> Result<ModelOrders> {
    if k == 0 {
        return Err(Error::config("order margin must be positive (over-parameterized orders exceed the true ones)"));
    }
    Ok(ModelOrders::new(true_orders.p + k, true_orders.q + k, true_orders.r + k))
}

#[derive(Clone, Debug)]
pub struct NoiseEstimator {
    n: usize,
    l: usize,
    orders: ModelOrders,
    mu: f64,
    alpha: DMatrix<f64>,
    gain: DMatrix<f64>,
    y_hist: LagBuffer,
    u_hist: LagBuffer,
    w_hist: LagBuffer,
    psi: DVector<f64>,
    last_b: f64,
    step: usize,
}

impl NoiseEstimator {
    /// Zero `α`, zero-filled histories and `P̄_0 = I/μ`.
    pub fn new(orders: ModelOrders, n: usize, l: usize, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::config(format!("mu must be positive and finite, got {mu}")));
        }
        if n == 0 || l == 0 {
            return Err(Error::config("noise estimator dimensions must be positive"));
        }
        let dim = orders.regressor_dim(n, l);
        if dim == 0 {
            return Err(Error::config("noise estimator orders are all zero"));
        }
        Ok(Self {
            n,
            l,
            orders,
            mu,
            alpha: DMatrix::zeros(dim, n),
            gain: DMatrix::identity(dim, dim) / mu,
            y_hist: LagBuffer::new(orders.p, n),
            u_hist: LagBuffer::new(orders.q, l),
            w_hist: LagBuffer::new(orders.r, n),
            psi: DVector::zeros(dim),
            last_b: 1.0,
            step: 0,
        })
    }

    /// Consumes `y_N` and `u_{N−1}` and returns `ŵ_N`.
    pub fn update(&mut self, y: &DVector<f64>, u_prev: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.n || u_prev.len() != self.l {
            return Err(Error::invalid(format!(
                "noise update expects y of length {} and u of length {}",
                self.n, self.l
            )));
        }
        if !all_finite(y.iter().chain(u_prev.iter())) {
            return Err(Error::Data(format!("non-finite observation at step {}", self.step)));
        }
        self.u_hist.push(u_prev);
        let mut at = self.y_hist.write_into(&mut self.psi, 0);
        at = self.u_hist.write_into(&mut self.psi, at);
        self.w_hist.write_into(&mut self.psi, at);

        // α_N = α_{N−1} + b P̄_{N−1} ψ (y_Nᵀ − ψᵀ α_{N−1})
        let innovation = y - self.alpha.tr_mul(&self.psi);
        let (b, p_psi) = sherman_morrison_downdate(&mut self.gain, &self.psi);
        self.alpha.ger(b, &p_psi, &innovation, 1.0);
        let w_hat = y - self.alpha.tr_mul(&self.psi);

        self.y_hist.push(y);
        self.w_hist.push(&w_hat);
        self.last_b = b;
        self.step += 1;
        Ok(w_hat)
    }

    pub fn orders(&self) -> ModelOrders {
        self.orders
    }

    pub fn dim(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    /// `P̄_N`.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// `b_{N−1}` from the most recent update; always in `(0, 1]`.
    pub fn last_b(&self) -> f64 {
        self.last_b
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn gain_is_positive_definite(&self) -> bool {
        self.gain.clone().cholesky().is_some()
    }

    /// Diagnostic only; costs a full eigensolve.
    pub fn min_gain_eigenvalue(&self) -> f64 {
        symmetric_extremes(&self.gain).1
    }

    pub fn snapshot(&self) -> NoiseSnapshot {
        let flat = |buf: &LagBuffer| buf.iter().map(|v| v.as_slice().to_vec()).collect();
        NoiseSnapshot {
            n: self.n,
            l: self.l,
            orders: self.orders,
            mu: self.mu,
            step: self.step,
            alpha: self.alpha.clone(),
            gain: self.gain.clone(),
            y_hist: flat(&self.y_hist),
            u_hist: flat(&self.u_hist),
            w_hist: flat(&self.w_hist),
        }
    }

    pub fn restore(snap: &NoiseSnapshot) -> Result<Self> {
        let mut est = Self::new(snap.orders, snap.n, snap.l, snap.mu)?;
        let dim = est.dim();
        if snap.alpha.shape() != (dim, snap.n) || snap.gain.shape() != (dim, dim) {
            return Err(Error::invalid("noise snapshot matrices have wrong shape"));
        }
        let lags = |rows: &[Vec<f64>], cap: usize, width: usize| -> Result<LagBuffer> {
            if rows.len() != cap || rows.iter().any(|r| r.len() != width) {
                return Err(Error::invalid("noise snapshot history has wrong shape"));
            }
            Ok(LagBuffer::from_lags(width, rows.iter().map(|r| DVector::from_column_slice(r)).collect()))
        };
        est.y_hist = lags(&snap.y_hist, snap.orders.p, snap.n)?;
        est.u_hist = lags(&snap.u_hist, snap.orders.q, snap.l)?;
        est.w_hist = lags(&snap.w_hist, snap.orders.r, snap.n)?;
        est.alpha = snap.alpha.clone();
        est.gain = snap.gain.clone();
        est.step = snap.step;
        Ok(est)
    }
}

/// Checkpoint of a [`NoiseEstimator`]; matrices are stored column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSnapshot {
    pub n: usize,
    pub l: usize,
    pub orders: ModelOrders,
    pub mu: f64,
    pub step: usize,
    #[serde(with = "serde_matrix::col_major")]
    pub alpha: DMatrix<f64>,
    #[serde(with = "serde_matrix::col_major")]
    pub gain: DMatrix<f64>,
    pub y_hist: Vec<Vec<f64>>,
    pub u_hist: Vec<Vec<f64>>,
    pub w_hist: Vec<Vec<f64>>,
}
