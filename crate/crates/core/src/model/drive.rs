use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fockspace::OperatorMatrix;
use crate::sparse::SparseOperator;

/// A basis that knows its dimension.
pub trait HilbertBasis: Send + Sync {
    fn dim(&self) -> usize;
}

impl HilbertBasis for crate::fockspace::CompositeBasis {
    fn dim(&self) -> usize {
        self.len()
    }
}

pub type Coefficient = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// One term `c(t) · A` of a time-dependent Hamiltonian.
#[derive(Clone)]
pub struct DriveTerm {
    pub coefficient: Coefficient,
    pub operator: SparseOperator,
}

impl DriveTerm {
    pub fn new(coefficient: impl Fn(f64) -> Complex64 + Send + Sync + 'static, operator: SparseOperator) -> Self {
        Self { coefficient: Arc::new(coefficient), operator }
    }

    pub fn real(coefficient: impl Fn(f64) -> f64 + Send + Sync + 'static, operator: SparseOperator) -> Self {
        Self::new(move |t| Complex64::new(coefficient(t), 0.0), operator)
    }
}

/// `H(t) = Σ_k c_k(t) A_k`. The builder's contract is that the sum is
/// Hermitian at every `t`; individual terms need not be.
#[derive(Clone)]
pub struct TimeDependentHamiltonian<B = crate::fockspace::CompositeBasis> {
    basis: Arc<B>,
    terms: Vec<DriveTerm>,
}

impl<B: HilbertBasis> TimeDependentHamiltonian<B> {
    pub fn new(basis: Arc<B>, terms: Vec<DriveTerm>) -> Self {
        let d = basis.dim();
        assert!(terms.iter().all(|t| t.operator.dim() == d), "term dimension must match basis");
        Self { basis, terms }
    }

    /// `H ≡ 0`.
    pub fn zero(basis: Arc<B>) -> Self {
        Self { basis, terms: Vec::new() }
    }

    pub fn basis(&self) -> &Arc<B> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn terms(&self) -> &[DriveTerm] {
        &self.terms
    }

    /// Dense `H(t)`.
    pub fn matrix_at(&self, t: f64) -> OperatorMatrix<B> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for term in &self.terms {
            let c = (term.coefficient)(t);
            for &(r, col, v) in term.operator.entries() {
                m[(r, col)] += c * v;
            }
        }
        OperatorMatrix::new(Arc::clone(&self.basis), m)
    }

    /// `out = H(t) · psi`
    pub fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for term in &self.terms {
            let c = (term.coefficient)(t);
            if c.re != 0.0 || c.im != 0.0 {
                term.operator.apply_add(c, psi, out);
            }
        }
    }
}
