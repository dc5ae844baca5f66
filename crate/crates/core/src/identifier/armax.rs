//! Streaming identification of ARMAX systems from `(u_k, y_k)` pairs.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{Identifier, IdentifierConfig};
use crate::armax_model::{ModelOrders, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, LagBuffer};
use crate::noise_estimator::{noise_order_margin, NoiseEstimator, DEFAULT_ORDER_MARGIN};

fn default_margin() -> usize {
    DEFAULT_ORDER_MARGIN
}

fn default_noise_mu() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmaxIdentifierConfig {
    pub orders: ModelOrders,
    /// Excess order of the noise estimator.
    #[serde(default = "default_margin")]
    pub noise_order_margin: usize,
    #[serde(default = "default_noise_mu")]
    pub noise_mu: f64,
    #[serde(default)]
    pub identifier: IdentifierConfig,
}

impl ArmaxIdentifierConfig {
    pub fn new(orders: ModelOrders) -> Self {
        Self {
            orders,
            noise_order_margin: DEFAULT_ORDER_MARGIN,
            noise_mu: 1.0,
            identifier: IdentifierConfig::default(),
        }
    }
}

/// Builds `φ_N = [y_Nᵀ … y_{N−p+1}ᵀ, u_Nᵀ … u_{N−q+1}ᵀ, ŵ_Nᵀ … ŵ_{N−r+1}ᵀ]ᵀ` online.
#[derive(Clone, Debug)]
pub struct ArmaxRegressor {
    n: usize,
    l: usize,
    noise: NoiseEstimator,
    ys: LagBuffer,
    us: LagBuffer,
    ws: LagBuffer,
    u_prev: DVector<f64>,
    phi: DVector<f64>,
}

impl ArmaxRegressor {
    pub fn new(n: usize, l: usize, orders: ModelOrders, noise_orders: ModelOrders, noise_mu: f64) -> Result<Self> {
        let noise = NoiseEstimator::new(noise_orders, n, l, noise_mu)?;
        let dim = orders.regressor_dim(n, l);
        if dim == 0 {
            return Err(Error::config("model orders are all zero"));
        }
        Ok(Self {
            n,
            l,
            noise,
            ys: LagBuffer::new(orders.p, n),
            us: LagBuffer::new(orders.q, l),
            ws: LagBuffer::new(orders.r, n),
            u_prev: DVector::zeros(l),
            phi: DVector::zeros(dim),
        })
    }

    pub fn noise_estimator(&self) -> &NoiseEstimator {
        &self.noise
    }

    /// Consumes `(u_N, y_N)`; returns `φ_N` and `ŵ_N`.
    pub fn next(&mut self, u: &DVector<f64>, y: &DVector<f64>) -> Result<(&DVector<f64>, DVector<f64>)> {
        if u.len() != self.l || y.len() != self.n {
            return Err(Error::invalid(format!(
                "expected u of length {} and y of length {}, got {} and {}",
                self.l,
                self.n,
                u.len(),
                y.len()
            )));
        }
        if !all_finite(u.iter()) {
            return Err(Error::Data(format!("non-finite input at step {}", self.noise.step())));
        }
        let w_hat = self.noise.update(y, &self.u_prev)?;
        self.u_prev.copy_from(u);
        self.ys.push(y);
        self.us.push(u);
        self.ws.push(&w_hat);
        let mut at = self.ys.write_into(&mut self.phi, 0);
        at = self.us.write_into(&mut self.phi, at);
        self.ws.write_into(&mut self.phi, at);
        Ok((&self.phi, w_hat))
    }
}

/// Regression pairs derived from one trajectory.
#[derive(Clone, Debug)]
pub struct RegressionStream {
    /// `φ_0, …, φ_{len−2}`.
    pub phis: Vec<DVector<f64>>,
    /// `y_1, …, y_{len−1}`, so `targets[N]` is regressed on `phis[N]`.
    pub targets: Vec<DVector<f64>>,
    /// `ŵ_0, …, ŵ_{len−1}`.
    pub w_hats: Vec<DVector<f64>>,
}

impl RegressionStream {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

pub fn regression_stream(
    trajectory: &Trajectory,
    n: usize,
    l: usize,
    orders: ModelOrders,
    noise_orders: ModelOrders,
    noise_mu: f64,
) -> Result<RegressionStream> {
    trajectory.validate(n, l)?;
    let mut regressor = ArmaxRegressor::new(n, l, orders, noise_orders, noise_mu)?;
    let len = trajectory.len();
    let mut phis = Vec::with_capacity(len.saturating_sub(1));
    let mut w_hats = Vec::with_capacity(len);
    for (i, obs) in trajectory.observations.iter().enumerate() {
        let (phi, w_hat) = regressor.next(&obs.u, &obs.y)?;
        if i + 1 < len {
            phis.push(phi.clone());
        }
        w_hats.push(w_hat);
    }
    let targets = trajectory.observations.iter().skip(1).map(|o| o.y.clone()).collect();
    Ok(RegressionStream { phis, targets, w_hats })
}

/// Noise estimation, regressor assembly and the sparse identifier in one streaming object.
#[derive(Clone, Debug)]
pub struct ArmaxIdentifier {
    regressor: ArmaxRegressor,
    identifier: Identifier,
    pending: Option<DVector<f64>>,
    last_w_hat: Option<DVector<f64>>,
    observed: usize,
}

impl ArmaxIdentifier {
    pub fn new(n: usize, l: usize, config: ArmaxIdentifierConfig) -> Result<Self> {
        if !(config.noise_mu > 0.0) || !config.noise_mu.is_finite() {
            return Err(Error::config(format!("noise_mu must be positive, got {}", config.noise_mu)));
        }
        let noise_orders = noise_order_margin(config.orders, config.noise_order_margin)?;
        let regressor = ArmaxRegressor::new(n, l, config.orders, noise_orders, config.noise_mu)?;
        let identifier = Identifier::new(config.orders.regressor_dim(n, l), n, config.identifier)?;
        Ok(Self { regressor, identifier, pending: None, last_w_hat: None, observed: 0 })
    }

    /// Feeds `(u_k, y_k)` in time order starting at `k = 0`. Returns whether a parameter
    /// update happened (every observation after the first one triggers one).
    pub fn observe(&mut self, u: &DVector<f64>, y: &DVector<f64>) -> Result<bool> {
        let mut updated = false;
        if let Some(phi) = &self.pending {
            self.identifier.update(phi, y)?;
            updated = true;
        }
        let (phi, w_hat) = self.regressor.next(u, y)?;
        match &mut self.pending {
            Some(p) => p.copy_from(phi),
            None => self.pending = Some(phi.clone()),
        }
        self.last_w_hat = Some(w_hat);
        self.observed += 1;
        Ok(updated)
    }

    pub fn identifier(&self) -> &Identifier {
        &self.identifier
    }

    pub fn regressor(&self) -> &ArmaxRegressor {
        &self.regressor
    }

    /// `ŵ_k` for the latest observation.
    pub fn last_noise_estimate(&self) -> Option<&DVector<f64>> {
        self.last_w_hat.as_ref()
    }

    pub fn observed(&self) -> usize {
        self.observed
    }
}
