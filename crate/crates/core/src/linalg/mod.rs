//! Sparse and dense linear algebra.

mod cholesky;
mod csr;
mod dense;
mod eigen;

pub use cholesky::{sparse_cholesky, CholeskyFactor};
pub use csr::CsrMatrix;
pub use dense::{DenseCholesky, DenseMatrix};
pub use eigen::{
    generalized_sym_eig, generalized_sym_eigvals, jacobi_eig3, sym_eig, sym_eigvals, SymEig,
};

/// Largest dense problem the eigensolvers accept.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("invalid sparse layout: {0}")]
    InvalidLayout(&'static str),
    #[error("index ({row}, {col}) out of bounds")]
    IndexOutOfBounds { row: usize, col: usize },
    #[error("entry ({row}, {col}) is not in the sparsity pattern")]
    NotInPattern { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix not SPD (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("sparse factorization failed")]
    FactorizationFailed,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("dense problem of size {0} exceeds the limit of {DENSE_LIMIT}")]
    TooLarge(usize),
}
