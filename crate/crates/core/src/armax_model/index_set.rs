use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// A set of `(row, column)` entries of a `rows × cols` matrix, zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeSet<(usize, usize)>,
}

impl IndexSet {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: BTreeSet::new() }
    }

    /// Entries with exactly zero value.
    pub fn zeros_of(x: &DMatrix<f64>) -> Self {
        sparse_index_set(x, 0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, s: usize, t: usize) -> bool {
        self.entries.contains(&(s, t))
    }

    pub fn complement(&self) -> Self {
        let entries = (0..self.rows)
            .flat_map(|s| (0..self.cols).map(move |t| (s, t)))
            .filter(|e| !self.entries.contains(e))
            .collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.entries.is_subset(&other.entries)
    }

    /// Boolean mask in column-major order matching `DMatrix` storage.
    pub fn mask(&self) -> DMatrix<bool> {
        DMatrix::from_fn(self.rows, self.cols, |s, t| self.contains(s, t))
    }
}

/// `{(s, t) : |X(s, t)| ≤ tau}`; `tau = 0` gives the exact zero set.
pub fn sparse_index_set(x: &DMatrix<f64>, tau: f64) -> IndexSet {
    assert!(tau >= 0.0, "threshold must be non-negative");
    let mut entries = BTreeSet::new();
    for t in 0..x.ncols() {
        for s in 0..x.nrows() {
            if x[(s, t)].abs() <= tau {
                entries.insert((s, t));
            }
        }
    }
    IndexSet { rows: x.nrows(), cols: x.ncols(), entries }
}
