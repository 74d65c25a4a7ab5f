pub mod fem;
pub mod formulations;
pub mod harness;
pub mod krylov;
pub mod linalg;
pub mod mesh;
pub mod rigid;
pub mod scalar;

pub use scalar::Real;

// Linear algebra and Krylov kernels are generic over `Real`; assembly and the
// formulations work in `f64`.
pub type Csr = linalg::CsrMatrix<f64>;
pub type Csr32 = linalg::CsrMatrix<f32>;
pub type Dense = linalg::DenseMatrix<f64>;
pub type Dense32 = linalg::DenseMatrix<f32>;
pub type Cholesky = linalg::CholeskyFactor<f64>;
pub type Cholesky32 = linalg::CholeskyFactor<f32>;
pub type Report = krylov::SolveReport<f64>;
pub type Report32 = krylov::SolveReport<f32>;
