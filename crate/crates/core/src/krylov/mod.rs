//! Krylov solvers and kernel-aware variants.

mod cg;
mod minres;
mod operator;
mod rng;
mod singular;

pub use cg::cg;
pub use minres::minres;
pub use operator::{FnOperator, Identity, LinearOperator};
pub use rng::{random_vector, Rng64};
pub use singular::{
    cg_singular, m_pseudo_solve, pseudo_solve, ProjectedInverse, PseudoInverse, RhsProjector,
    SingularError, SingularReport, SolProjector,
};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopMode {
    /// Preconditioned residual norm relative to its initial value.
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StoppingRule {
    pub mode: StopMode,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl StoppingRule {
    pub fn relative(tolerance: f64, max_iterations: usize) -> Self {
        Self {
            mode: StopMode::Relative,
            tolerance,
            max_iterations,
        }
    }

    pub fn absolute(tolerance: f64, max_iterations: usize) -> Self {
        Self {
            mode: StopMode::Absolute,
            tolerance,
            max_iterations,
        }
    }

    pub(crate) fn target<T: Real>(&self, initial: T) -> T {
        assert!(self.tolerance > 0.0, "stopping tolerance must be positive");
        match self.mode {
            StopMode::Relative => T::of(self.tolerance) * initial,
            StopMode::Absolute => T::of(self.tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// Curvature `pᵀAp <= 0` in CG, or an indefinite preconditioner.
    Breakdown(String),
    NotFinite,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// Preconditioned residual norms, starting with the initial one.
    pub residual_history: Vec<T>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl<T: Real> SolveReport<T> {
    pub(crate) fn finish(
        solution: Vec<T>,
        residual_history: Vec<T>,
        stop_reason: StopReason,
    ) -> Self {
        Self {
            solution,
            iterations: residual_history.len().saturating_sub(1),
            converged: stop_reason == StopReason::Converged,
            residual_history,
            stop_reason,
        }
    }

    pub fn final_residual(&self) -> T {
        *self.residual_history.last().unwrap_or(&T::zero())
    }
}
