use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, sherman_morrison_downdate};

/// Regularized recursive least squares with an optional proximal correction.
///
/// Tracks `P_N = (μI + Σ_{k<N} φ_k φ_kᵀ)⁻¹` and
/// `Θ_{N+1} = Θ_N + a_N P_N φ_N (y_{N+1}ᵀ − φ_Nᵀ Θ_N) + μ P_{N+1} (Ξ_N − Ξ_{N−1})`
/// with `a_N = (1 + φ_Nᵀ P_N φ_N)⁻¹`. Without the correction this is plain RLS started from
/// `Θ_0 = 0`, `P_0 = I/μ`.
#[derive(Clone, Debug)]
pub struct RlsCore {
    mu: f64,
    theta: DMatrix<f64>,
    gain: DMatrix<f64>,
}

impl RlsCore {
    pub fn new(d: usize, n: usize, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::config(format!("mu must be positive and finite, got {mu}")));
        }
        if d == 0 || n == 0 {
            return Err(Error::config("parameter matrix dimensions must be positive"));
        }
        Ok(Self { mu, theta: DMatrix::zeros(d, n), gain: DMatrix::identity(d, d) / mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    /// `P_N`.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn dims(&self) -> (usize, usize) {
        self.theta.shape()
    }

    pub(crate) fn check_inputs(&self, phi: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        let (d, n) = self.dims();
        if phi.len() != d || y.len() != n {
            return Err(Error::invalid(format!(
                "expected regressor of length {d} and output of length {n}, got {} and {}",
                phi.len(),
                y.len()
            )));
        }
        if !all_finite(phi.iter().chain(y.iter())) {
            return Err(Error::Data("non-finite regressor or output".into()));
        }
        Ok(())
    }

    /// One update; `xi_delta` is `Ξ_N − Ξ_{N−1}`. Returns `a_N`.
    ///
    /// Invalid inputs leave the state untouched.
    pub fn update(&mut self, phi: &DVector<f64>, y: &DVector<f64>, xi_delta: Option<&DMatrix<f64>>) -> Result<f64> {
        self.check_inputs(phi, y)?;
        if let Some(delta) = xi_delta {
            if delta.shape() != self.theta.shape() {
                return Err(Error::invalid("correction term has the wrong shape"));
            }
        }
        let innovation = y - self.theta.tr_mul(phi);
        let (a, p_phi) = sherman_morrison_downdate(&mut self.gain, phi);
        self.theta.ger(a, &p_phi, &innovation, 1.0);
        if let Some(delta) = xi_delta {
            if delta.iter().any(|v| *v != 0.0) {
                self.theta.gemm(self.mu, &self.gain, delta, 1.0);
            }
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_frobenius;

    #[test]
    fn zero_regressor_only_applies_correction() {
        let mut core = RlsCore::new(3, 2, 2.0).unwrap();
        let delta = DMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let a = core.update(&DVector::zeros(3), &DVector::from_vec(vec![5.0, 1.0]), Some(&delta)).unwrap();
        assert_eq!(a, 1.0);
        assert_eq!(core.gain(), &(DMatrix::identity(3, 3) / 2.0));
        // μ P Δ = 2 · (I/2) Δ = Δ
        assert!(relative_frobenius(core.theta(), &delta) < 1e-15);
    }

    #[test]
    fn noiseless_orthogonal_recovery() {
        let theta = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 0.0, 3.0, 1.0]);
        let mut core = RlsCore::new(3, 2, 1e-8).unwrap();
        for k in 0..30 {
            let mut phi = DVector::zeros(3);
            phi[k % 3] = 1.0 + (k / 3) as f64;
            let y = theta.tr_mul(&phi);
            core.update(&phi, &y, None).unwrap();
        }
        assert!((core.theta() - &theta).amax() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs_without_mutation() {
        let mut core = RlsCore::new(2, 1, 1.0).unwrap();
        let before = core.theta().clone();
        assert!(core.update(&DVector::zeros(3), &DVector::zeros(1), None).is_err());
        let nan = DVector::from_vec(vec![f64::NAN, 0.0]);
        assert!(matches!(core.update(&nan, &DVector::zeros(1), None), Err(Error::Data(_))));
        assert_eq!(core.theta(), &before);
        assert!(RlsCore::new(2, 1, 0.0).is_err());
    }
}
