use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_scale() -> f64 {
    1.0
}

fn default_exponent() -> f64 {
    0.5
}

/// Regularization sequence `λ_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSchedule {
    /// `scale · (log N / N)^exponent` for `N ≥ 2`; earlier steps reuse the `N = 2` value.
    LogNOverN {
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_exponent")]
        exponent: f64,
    },
    /// `scale · sqrt(log λ_max(N) / λ_min(N))`. Needs `μ > 1` so the value is positive from
    /// the first step.
    EigRatioSqrt {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    Constant { value: f64 },
    /// `values[N]`, holding the last entry beyond the table.
    CustomTable { values: Vec<f64> },
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        LambdaSchedule::LogNOverN { scale: 1.0, exponent: 0.5 }
    }
}

impl LambdaSchedule {
    pub fn validate(&self, mu: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::config(msg));
        match self {
            LambdaSchedule::LogNOverN { scale, exponent } => {
                if !(*scale > 0.0 && scale.is_finite() && exponent.is_finite()) {
                    return bad(format!("log_n_over_n needs a positive scale and finite exponent, got {scale}, {exponent}"));
                }
            }
            LambdaSchedule::EigRatioSqrt { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return bad(format!("eig_ratio_sqrt needs a positive scale, got {scale}"));
                }
                if mu <= 1.0 {
                    return bad("eig_ratio_sqrt is zero at the first step unless mu > 1".into());
                }
            }
            LambdaSchedule::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return bad(format!("constant schedule needs a positive value, got {value}"));
                }
            }
            LambdaSchedule::CustomTable { values } => {
                if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("custom_table needs a non-empty list of positive values".into());
                }
            }
        }
        Ok(())
    }

    /// `λ_N` for update index `step`, given the current extreme eigenvalues.
    pub fn value(&self, step: usize, lambda_max: f64, lambda_min: f64) -> Result<f64> {
        let value = match self {
            LambdaSchedule::LogNOverN { scale, exponent } => {
                let n = step.max(2) as f64;
                scale * (n.ln() / n).powf(*exponent)
            }
            LambdaSchedule::EigRatioSqrt { scale } => scale * (lambda_max.ln() / lambda_min).sqrt(),
            LambdaSchedule::Constant { value } => *value,
            LambdaSchedule::CustomTable { values } => values[step.min(values.len() - 1)],
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Schedule(format!("lambda at step {step} is {value}; it must be positive")));
        }
        Ok(value)
    }

    /// Whether [`LambdaSchedule::value`] reads the eigenvalues.
    pub fn needs_eigenvalues(&self) -> bool {
        matches!(self, LambdaSchedule::EigRatioSqrt { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_n_over_n_values() {
        let s = LambdaSchedule::default();
        let at2 = (2f64.ln() / 2.0).sqrt();
        assert_eq!(s.value(0, 1.0, 1.0).unwrap(), at2);
        assert_eq!(s.value(1, 1.0, 1.0).unwrap(), at2);
        assert_eq!(s.value(2, 1.0, 1.0).unwrap(), at2);
        let at5000 = (5000f64.ln() / 5000.0).sqrt();
        assert!((s.value(5000, 1.0, 1.0).unwrap() - at5000).abs() < 1e-15);
    }

    #[test]
    fn eig_ratio_requires_mu_above_one() {
        let s = LambdaSchedule::EigRatioSqrt { scale: 1.0 };
        assert!(s.validate(1.0).is_err());
        assert!(s.validate(2.0).is_ok());
        assert!(s.value(3, 1.0, 1.0).is_err());
        assert!((s.value(3, std::f64::consts::E, 4.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn custom_table_holds_last() {
        let s = LambdaSchedule::CustomTable { values: vec![0.3, 0.2] };
        assert_eq!(s.value(0, 1.0, 1.0).unwrap(), 0.3);
        assert_eq!(s.value(10, 1.0, 1.0).unwrap(), 0.2);
    }

    #[test]
    fn json_shape() {
        let s: LambdaSchedule = serde_json::from_str(r#"{"kind":"log_n_over_n"}"#).unwrap();
        assert_eq!(s, LambdaSchedule::default());
        let c: LambdaSchedule = serde_json::from_str(r#"{"kind":"constant","value":0.1}"#).unwrap();
        assert_eq!(c, LambdaSchedule::Constant { value: 0.1 });
        assert!(LambdaSchedule::Constant { value: 0.0 }.validate(1.0).is_err());
    }
}
