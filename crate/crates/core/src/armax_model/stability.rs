use nalgebra::{DMatrix, Schur};
use serde::{Deserialize, Serialize};

use super::ArmaxSystem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzStability {
    /// All roots of `det C(z)` lie strictly outside the closed unit disk.
    pub stable: bool,
    /// Smallest root modulus; infinite when `det C(z)` has no finite roots.
    pub min_root_modulus: f64,
}

/// Tests `det C(z) ≠ 0` for `|z| ≤ 1`.
///
/// The roots of `det C(z)` are the reciprocals of the nonzero eigenvalues of the block
/// companion matrix of `λ^r I + C_1 λ^{r−1} + … + C_r`, so stability is a spectral-radius
/// check on that matrix.
pub fn check_cz_stability(system: &ArmaxSystem) -> CzStability {
    // trailing zero blocks only add roots at infinity
    let mut blocks = system.c_blocks();
    while let Some((last, rest)) = blocks.split_last() {
        if last.iter().any(|v| *v != 0.0) {
            break;
        }
        blocks = rest;
    }
    let r = blocks.len();
    if r == 0 {
        return CzStability { stable: true, min_root_modulus: f64::INFINITY };
    }
    let n = system.n();
    let size = n * r;
    let mut companion = DMatrix::zeros(size, size);
    for (v, c) in blocks.iter().enumerate() {
        companion.view_mut((0, v * n), (n, n)).copy_from(&(-c));
    }
    for i in n..size {
        companion[(i, i - n)] = 1.0;
    }
    let radius = spectral_radius(companion);
    let min_root_modulus = if radius > 0.0 { 1.0 / radius } else { f64::INFINITY };
    CzStability { stable: radius < 1.0, min_root_modulus }
}

/// The default Schur iteration (machine-epsilon tolerance, no iteration cap) never terminates
/// on companion matrices with repeated eigenvalues; a slightly looser tolerance does, and
/// Gelfand's formula covers anything that still fails.
fn spectral_radius(m: DMatrix<f64>) -> f64 {
    if let Some(schur) = Schur::try_new(m.clone(), 1e-14, 10_000) {
        return schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let first = m.norm();
    if first == 0.0 {
        return 0.0;
    }
    let mut power = &m / first;
    let mut log_scale = first.ln();
    let steps = 2000;
    for _ in 1..steps {
        power = &power * &m;
        let norm = power.norm();
        if norm == 0.0 {
            return 0.0;
        }
        power /= norm;
        log_scale += norm.ln();
    }
    (log_scale / steps as f64).exp()
}
