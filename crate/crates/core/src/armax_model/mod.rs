//! Multivariate ARMAX systems
//!
//! `A(z) y_{k+1} = B(z) u_k + C(z) w_{k+1}` with
//! `A(z) = I + A_1 z + … + A_p z^p`, `B(z) = B_1 + … + B_q z^{q−1}`,
//! `C(z) = I + C_1 z + … + C_r z^r` and `z` the back-shift operator.
//!
//! The stacked parameter matrix is `Θ = [−A_1, …, −A_p, B_1, …, B_q, C_1, …, C_r]ᵀ`
//! (shape `d × n`, `d = np + lq + nr`) so that `y_{k+1} = Θᵀ φ⁰_k + w_{k+1}`.

mod index_set;
mod io;
mod regressor;
mod simulate;
mod stability;

pub use index_set::{sparse_index_set, IndexSet};
pub use io::{read_trajectory_csv, write_trajectory_csv, TrajectoryCsvReader, TrajectoryHeader};
pub use regressor::build_phi0;
pub use simulate::{
    generate_linear_regression_trial, generate_trajectory, simulate_step, trial_seed,
    InputGenerator, InputGeneratorSpec, InputKind, NoiseGenerator, RegressionTrial,
    SimulationHistory,
};
pub use stability::{check_cz_stability, CzStability};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::serde_matrix;

/// Default CR / support threshold.
pub const DEFAULT_TAU: f64 = 1e-7;

/// Lag orders `(p, q, r)` of the output, input and noise polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOrders {
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

impl ModelOrders {
    pub const fn new(p: usize, q: usize, r: usize) -> Self {
        Self { p, q, r }
    }

    /// Regressor length `np + lq + nr`.
    pub fn regressor_dim(&self, n: usize, l: usize) -> usize {
        n * self.p + l * self.q + n * self.r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmaxSystem {
    n: usize,
    l: usize,
    #[serde(with = "serde_matrix::row_major_vec")]
    a: Vec<DMatrix<f64>>,
    #[serde(with = "serde_matrix::row_major_vec")]
    b: Vec<DMatrix<f64>>,
    #[serde(with = "serde_matrix::row_major_vec")]
    c: Vec<DMatrix<f64>>,
}

impl ArmaxSystem {
    /// Builds a system from its coefficient blocks `A_1..A_p`, `B_1..B_q`, `C_1..C_r`.
    pub fn new(n: usize, l: usize, a: Vec<DMatrix<f64>>, b: Vec<DMatrix<f64>>, c: Vec<DMatrix<f64>>) -> Result<Self> {
        let sys = Self { n, l, a, b, c };
        sys.validate()?;
        Ok(sys)
    }

    /// Checks block shapes; used after deserialization too.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.l == 0 {
            return Err(Error::invalid("system dimensions n and l must be positive"));
        }
        let check = |blocks: &[DMatrix<f64>], cols: usize, name: &str| -> Result<()> {
            for (i, m) in blocks.iter().enumerate() {
                if m.nrows() != self.n || m.ncols() != cols {
                    return Err(Error::invalid(format!(
                        "{name}_{} has shape {}x{}, expected {}x{}",
                        i + 1,
                        m.nrows(),
                        m.ncols(),
                        self.n,
                        cols
                    )));
                }
                if !m.iter().all(|v| v.is_finite()) {
                    return Err(Error::invalid(format!("{name}_{} has non-finite entries", i + 1)));
                }
            }
            Ok(())
        };
        check(&self.a, self.n, "A")?;
        check(&self.b, self.l, "B")?;
        check(&self.c, self.n, "C")?;
        if self.dim() == 0 {
            return Err(Error::invalid("system has no parameters (p = q = r = 0)"));
        }
        Ok(())
    }

    /// The ten-channel system used throughout the experiments:
    /// `A_1 = −I`, `A_2 = 0.5 I`, `B_1 = I`, `B_2 = 0.5 I`, `C_1 = 0.8 I`, `C_2 = 0`.
    pub fn example1() -> Self {
        let eye = DMatrix::<f64>::identity(10, 10);
        Self {
            n: 10,
            l: 10,
            a: vec![-&eye, &eye * 0.5],
            b: vec![eye.clone(), &eye * 0.5],
            c: vec![&eye * 0.8, DMatrix::zeros(10, 10)],
        }
    }

    /// Inverse of [`ArmaxSystem::theta`].
    pub fn from_theta(theta: &DMatrix<f64>, n: usize, l: usize, orders: ModelOrders) -> Result<Self> {
        let d = orders.regressor_dim(n, l);
        if theta.nrows() != d || theta.ncols() != n {
            return Err(Error::invalid(format!(
                "theta has shape {}x{}, expected {}x{}",
                theta.nrows(),
                theta.ncols(),
                d,
                n
            )));
        }
        let mut row = 0;
        let mut take = |count: usize, width: usize, negate: bool| -> Vec<DMatrix<f64>> {
            (0..count)
                .map(|_| {
                    let block = theta.rows(row, width).transpose();
                    row += width;
                    if negate {
                        -block
                    } else {
                        block
                    }
                })
                .collect()
        };
        let a = take(orders.p, n, true);
        let b = take(orders.q, l, false);
        let c = take(orders.r, n, false);
        Self::new(n, l, a, b, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn orders(&self) -> ModelOrders {
        ModelOrders::new(self.a.len(), self.b.len(), self.c.len())
    }

    /// Regressor dimension `d`.
    pub fn dim(&self) -> usize {
        self.orders().regressor_dim(self.n, self.l)
    }

    pub fn a_blocks(&self) -> &[DMatrix<f64>] {
        &self.a
    }

    pub fn b_blocks(&self) -> &[DMatrix<f64>] {
        &self.b
    }

    pub fn c_blocks(&self) -> &[DMatrix<f64>] {
        &self.c
    }

    /// Stacked `d × n` parameter matrix.
    pub fn theta(&self) -> DMatrix<f64> {
        let mut theta = DMatrix::zeros(self.dim(), self.n);
        let mut row = 0;
        for a in &self.a {
            theta.rows_mut(row, self.n).copy_from(&(-a.transpose()));
            row += self.n;
        }
        for b in &self.b {
            theta.rows_mut(row, self.l).copy_from(&b.transpose());
            row += self.l;
        }
        for c in &self.c {
            theta.rows_mut(row, self.n).copy_from(&c.transpose());
            row += self.n;
        }
        theta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub k: usize,
    pub u: DVector<f64>,
    pub y: DVector<f64>,
}

/// Ordered observations starting at `k = 0`, optionally with the simulated noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub observations: Vec<Observation>,
    pub true_noise: Option<Vec<DVector<f64>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn validate(&self, n: usize, l: usize) -> Result<()> {
        for (i, obs) in self.observations.iter().enumerate() {
            if obs.k != i {
                return Err(Error::invalid(format!("observation {i} has time index {}", obs.k)));
            }
            if obs.u.len() != l || obs.y.len() != n {
                return Err(Error::invalid(format!("observation {i} has wrong vector lengths")));
            }
        }
        if let Some(w) = &self.true_noise {
            if w.len() != self.observations.len() || w.iter().any(|v| v.len() != n) {
                return Err(Error::invalid("true noise does not match observations"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_theta_shape_and_inventory() {
        let sys = ArmaxSystem::example1();
        assert_eq!(sys.dim(), 60);
        let theta = sys.theta();
        assert_eq!(theta.shape(), (60, 10));
        let nonzero: Vec<f64> = theta.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nonzero.len(), 50);
        // −A_1 = I, −A_2 = −0.5 I, B_1 = I, B_2 = 0.5 I, C_1 = 0.8 I
        assert_eq!(theta[(0, 0)], 1.0);
        assert_eq!(theta[(10, 0)], -0.5);
        assert_eq!(theta[(20, 0)], 1.0);
        assert_eq!(theta[(30, 0)], 0.5);
        assert_eq!(theta[(40, 0)], 0.8);
    }

    #[test]
    fn theta_round_trip() {
        let sys = ArmaxSystem::example1();
        let back = ArmaxSystem::from_theta(&sys.theta(), 10, 10, sys.orders()).unwrap();
        assert_eq!(back, sys);
    }

    #[test]
    fn mismatched_blocks_are_rejected() {
        let err = ArmaxSystem::new(2, 1, vec![DMatrix::zeros(2, 3)], vec![], vec![]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn system_json_round_trip() {
        let sys = ArmaxSystem::example1();
        let json = serde_json::to_string(&sys).unwrap();
        let back: ArmaxSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sys);
    }
}
