//! Small dense linear-algebra helpers shared by the estimators.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Rank-one downdate of an inverse information matrix.
///
/// Given `P = R⁻¹` and a regressor `phi`, replaces `P` with `(R + phi phiᵀ)⁻¹` via
/// Sherman–Morrison and re-symmetrizes. Returns the gain scalar `(1 + phiᵀ P phi)⁻¹`
/// together with `P phi` evaluated *before* the downdate.
pub fn sherman_morrison_downdate(p: &mut DMatrix<f64>, phi: &DVector<f64>) -> (f64, DVector<f64>) {
    let p_phi = &*p * phi;
    let gain = 1.0 / (1.0 + phi.dot(&p_phi));
    p.ger(-gain, &p_phi, &p_phi, 1.0);
    symmetrize(p);
    (gain, p_phi)
}

/// `M ← (M + Mᵀ)/2` in place.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `‖a − b‖_F / max(‖b‖_F, floor)`.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let denom = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / denom
}

/// Largest and smallest eigenvalue of a symmetric matrix via a full eigensolve.
pub fn symmetric_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    (max, min)
}

/// Sign with `sgn(0) = +1`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn all_finite<'a>(values: impl IntoIterator<Item = &'a f64>) -> bool {
    values.into_iter().all(|v| v.is_finite())
}

/// Fixed-capacity lag buffer of equally sized vectors, newest first.
///
/// Starts zero-filled so that lags reaching before time zero read as zero.
#[derive(Clone, Debug)]
pub struct LagBuffer {
    dim: usize,
    lags: VecDeque<DVector<f64>>,
}

impl LagBuffer {
    pub fn new(capacity: usize, dim: usize) -> Self {
        let lags = (0..capacity).map(|_| DVector::zeros(dim)).collect();
        Self { dim, lags }
    }

    pub fn capacity(&self) -> usize {
        self.lags.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, v: &DVector<f64>) {
        debug_assert_eq!(v.len(), self.dim);
        if let Some(mut slot) = self.lags.pop_back() {
            slot.copy_from(v);
            self.lags.push_front(slot);
        }
    }

    /// Lag `i` (0 = newest).
    pub fn get(&self, i: usize) -> &DVector<f64> {
        &self.lags[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.lags.iter()
    }

    /// Copies every lag, newest first, into `dst` starting at `offset`; returns the end offset.
    pub fn write_into(&self, dst: &mut DVector<f64>, offset: usize) -> usize {
        let mut at = offset;
        for lag in &self.lags {
            dst.rows_mut(at, self.dim).copy_from(lag);
            at += self.dim;
        }
        at
    }

    pub fn to_vec(&self) -> Vec<DVector<f64>> {
        self.lags.iter().cloned().collect()
    }

    /// Rebuilds a buffer from lags listed newest first.
    pub fn from_lags(dim: usize, lags: Vec<DVector<f64>>) -> Self {
        Self { dim, lags: lags.into() }
    }
}

/// Serde adapters for dense matrices.
pub mod serde_matrix {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    /// Nested row-major arrays, `[[row 0], [row 1], ...]`.
    pub mod row_major {
        use super::*;

        pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
            rows.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
            let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
            from_rows(&rows).map_err(serde::de::Error::custom)
        }

        pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
            let nrows = rows.len();
            let ncols = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != ncols) {
                return Err("ragged matrix rows".into());
            }
            Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
        }
    }

    /// Row-major nested arrays for a list of matrices.
    pub mod row_major_vec {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
            let all: Vec<Vec<Vec<f64>>> = ms
                .iter()
                .map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect();
            all.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
            let all: Vec<Vec<Vec<f64>>> = Vec::deserialize(d)?;
            all.iter()
                .map(|rows| super::row_major::from_rows(rows).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    /// `{ "rows": r, "cols": c, "data": [column-major values] }`.
    pub mod col_major {
        use super::*;

        #[derive(Serialize, Deserialize)]
        struct Packed {
            rows: usize,
            cols: usize,
            data: Vec<f64>,
        }

        pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
            Packed { rows: m.nrows(), cols: m.ncols(), data: m.as_slice().to_vec() }.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
            let p = Packed::deserialize(d)?;
            if p.data.len() != p.rows * p.cols {
                return Err(serde::de::Error::custom("matrix data length does not match shape"));
            }
            Ok(DMatrix::from_column_slice(p.rows, p.cols, &p.data))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downdate_matches_direct_inverse() {
        let mut r = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let mut p = r.clone().try_inverse().unwrap();
        let phi = DVector::from_vec(vec![0.3, -1.2, 0.7]);
        let (gain, _) = sherman_morrison_downdate(&mut p, &phi);
        r += &phi * phi.transpose();
        let direct = r.try_inverse().unwrap();
        assert!(relative_frobenius(&p, &direct) < 1e-13);
        assert!(gain > 0.0 && gain <= 1.0);
    }

    #[test]
    fn lag_buffer_orders_newest_first() {
        let mut buf = LagBuffer::new(3, 1);
        for v in 1..=4 {
            buf.push(&DVector::from_element(1, v as f64));
        }
        let got: Vec<f64> = buf.iter().map(|v| v[0]).collect();
        assert_eq!(got, vec![4.0, 3.0, 2.0]);
        let mut dst = DVector::zeros(4);
        assert_eq!(buf.write_into(&mut dst, 1), 4);
        assert_eq!(dst.as_slice(), &[0.0, 4.0, 3.0, 2.0]);
    }

    #[test]
    fn zero_capacity_buffer_is_inert() {
        let mut buf = LagBuffer::new(0, 2);
        buf.push(&DVector::zeros(2));
        assert_eq!(buf.capacity(), 0);
    }

    #[test]
    fn sgn_of_zero_is_positive() {
        assert_eq!(sgn(0.0), 1.0);
        assert_eq!(sgn(-0.0), 1.0);
        assert_eq!(sgn(-3.0), -1.0);
    }
}
