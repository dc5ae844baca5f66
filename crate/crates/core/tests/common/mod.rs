//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Sparse Θ with roughly a third of the entries nonzero and bounded away from zero.
pub fn sparse_theta(rng: &mut ChaCha8Rng, d: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, n, |_, _| {
        if rng.random::<f64>() < 0.35 {
            let v: f64 = rng.sample(StandardNormal);
            v.signum() * (0.5 + v.abs())
        } else {
            0.0
        }
    })
}

pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// `(μI + Σφφᵀ)⁻¹(Σφyᵀ + μΞ)` by LU on the accumulated normal equations.
pub fn batch_theta(phis: &[DVector<f64>], ys: &[DVector<f64>], mu: f64, xi: &DMatrix<f64>) -> DMatrix<f64> {
    let d = xi.nrows();
    let mut gram = DMatrix::identity(d, d) * mu;
    let mut rhs = xi * mu;
    for (phi, y) in phis.iter().zip(ys) {
        gram += phi * phi.transpose();
        rhs += phi * y.transpose();
    }
    gram.lu().solve(&rhs).expect("gram is nonsingular")
}

/// Golden-section minimization of a unimodal scalar function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-11 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of `½(y − x)² + γ|x|` by a coarse grid followed by golden section on the
/// neighbouring cells.
pub fn numeric_prox(y: f64, gamma: f64) -> f64 {
    let f = |x: f64| 0.5 * (y - x).powi(2) + gamma * x.abs();
    let span = y.abs() + 1.0;
    let cells = 400;
    let h = 2.0 * span / cells as f64;
    let best = (0..=cells).map(|i| -span + i as f64 * h).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    golden_min(f, best - h, best + h)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
