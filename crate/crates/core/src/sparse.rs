//! Coordinate-list operators used on the hot paths of the propagators.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// A square operator stored as its nonzero entries, sorted by row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOperator {
    pub fn new(dim: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        entries.sort_by_key(|e| (e.0, e.1));
        debug_assert!(entries.iter().all(|e| e.0 < dim && e.1 < dim));
        Self { dim, entries }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.re != 0.0 || v.im != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Self { dim: m.nrows(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.dim, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * factor)).collect())
    }

    /// `out += coeff * (self · x)`
    #[inline]
    pub fn apply_add(&self, coeff: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        for &(r, c, v) in &self.entries {
            out[r] += coeff * v * x[c];
        }
    }
}
