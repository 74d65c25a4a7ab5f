//! Sparse Cholesky factorization backed by faer's supernodal `LLᵀ` with an
//! approximate-minimum-degree ordering.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Side};

use super::{CsrMatrix, LinalgError};
use crate::scalar::{norm_inf, Real};

/// `A = LLᵀ` of a symmetric positive definite CSR matrix.
pub struct CholeskyFactor<T: Real> {
    n: usize,
    llt: Llt<usize, T>,
}

impl<T: Real> std::fmt::Debug for CholeskyFactor<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CholeskyFactor")
            .field("n", &self.n)
            .finish()
    }
}

/// Factors `a`. A matrix that factors numerically but is singular to working
/// precision (a semidefinite matrix with a kernel, say) is also rejected: one
/// probe solve estimates the condition number and anything beyond
/// `eps^(-3/4)` is reported as not SPD.
pub fn sparse_cholesky<T: Real>(a: &CsrMatrix<T>) -> Result<CholeskyFactor<T>, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::NotSquare(n, a.ncols()));
    }
    if n == 0 {
        return Err(LinalgError::InvalidLayout("empty matrix"));
    }
    if !a.values().iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NotPositiveDefinite { pivot: 0 });
    }
    // A symmetric CSR matrix read column-wise is its own transpose, so the
    // row-major arrays are passed straight through as CSC.
    let symbolic = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
    let mat = SparseColMatRef::new(symbolic, a.values());
    let sym = SymbolicLlt::try_new(symbolic, Side::Lower)
        .map_err(|_| LinalgError::FactorizationFailed)?;
    let llt = Llt::try_new_with_symbolic(sym, mat, Side::Lower).map_err(|e| match e {
        faer::sparse::linalg::LltError::Numeric(
            faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index },
        ) => LinalgError::NotPositiveDefinite { pivot: index },
        faer::sparse::linalg::LltError::Generic(_) => LinalgError::FactorizationFailed,
    })?;
    let factor = CholeskyFactor { n, llt };
    factor.probe(a)?;
    Ok(factor)
}

impl<T: Real> CholeskyFactor<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let rhs = MatMut::from_column_major_slice_mut(b, self.n, 1);
        self.llt.solve_in_place(rhs);
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    fn probe(&self, a: &CsrMatrix<T>) -> Result<(), LinalgError> {
        // deterministic, not aligned with constants or coordinate vectors
        let b: Vec<T> = (0..self.n)
            .map(|i| T::of(((i * 7919 + 13) % 101) as f64 / 101.0 - 0.5))
            .collect();
        let x = self.solve(&b);
        let bn = norm_inf(&b);
        if bn == T::zero() {
            return Ok(());
        }
        let mut a_norm = T::zero();
        for r in 0..a.nrows() {
            let (_, vals) = a.row(r);
            let s = vals.iter().fold(T::zero(), |s, v| s + v.abs());
            a_norm = a_norm.max(s);
        }
        let cond = a_norm * norm_inf(&x) / bn;
        let limit = T::epsilon().powf(T::of(-0.75));
        let r = a.mul_vec(&x);
        let res = r
            .iter()
            .zip(&b)
            .fold(T::zero(), |m, (&ri, &bi)| m.max((ri - bi).abs()));
        if !cond.is_finite() || cond > limit || res > T::epsilon().sqrt() * bn {
            return Err(LinalgError::NotPositiveDefinite { pivot: self.n });
        }
        Ok(())
    }
}
