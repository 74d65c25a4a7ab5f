//! Linear systems and preconditioners for the singular elasticity problem.

mod block;
mod eigen;
mod lagrange;
mod mixed;
mod pinpoint;

pub use block::{Block, BlockDiagonal, BlockEntry, BlockSystem, LowRankUpdate};
pub use eigen::{
    bounds_from_values, eigen_bounds, lagrange_eigen_problem, EigenPrecond, SpectralBounds,
};
pub use lagrange::{
    build_lagrange, natural_norm_operator, precond_b1, precond_be, precond_bm, solve_lagrange,
    solve_natural_norm, InnerInverse, LagrangePrecond, LagrangeSolution, INNER_RTOL,
};
pub use mixed::{
    assemble_mixed, build_mixed_double, build_mixed_single, precond_mixed, Lambda, MixedBlocks,
};
pub use pinpoint::{pinned_dofs, pinpoint, pinpoint_dofs, PinStrategy, PinnedSystem};

use crate::fem::AssemblyError;
use crate::linalg::LinalgError;
use crate::rigid::RigidError;

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("block ({row}, {col}) has shape {found:?}, layout expects {expected:?}")]
    Shape {
        row: usize,
        col: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Rigid(#[from] RigidError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("{0}")]
    Spaces(&'static str),
    #[error("pinpoint: {0}")]
    Pinpoint(String),
    #[error("spectrum: {0}")]
    Spectrum(&'static str),
}
