//! Lagrange multiplier saddle system, its Riesz-map preconditioners, and the
//! natural-norm SPD system.

use std::sync::Arc;

use super::block::{Block, BlockDiagonal, BlockSystem, LowRankUpdate};
use super::FormulationError;
use crate::krylov::{cg, minres, Identity, LinearOperator, SolveReport, StoppingRule};
use crate::linalg::{CholeskyFactor, CsrMatrix};
use crate::rigid::{BasisMode, RigidBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagrangePrecond {
    /// `diag(H⁻¹, I)` with `H` the `H¹` inner product.
    B1,
    /// `diag((A + W Wᵀ)⁻¹, I)`
    Be,
    /// `diag((A + M)⁻¹, I)`
    Bm,
}

fn require_l2(basis: &RigidBasis) -> Result<(), FormulationError> {
    if basis.mode != BasisMode::L2 {
        return Err(crate::rigid::RigidError::ModeMismatch {
            expected: BasisMode::L2,
            found: basis.mode,
        }
        .into());
    }
    Ok(())
}

/// `[[A, W], [Wᵀ, 0]]` with right-hand side `[b, 0]`.
pub fn build_lagrange(
    a: &Arc<CsrMatrix<f64>>,
    basis: &RigidBasis,
    b: &[f64],
) -> Result<BlockSystem, FormulationError> {
    require_l2(basis)?;
    let n = a.nrows();
    let w = Arc::new(basis.w_columns().to_vec());
    let mut s = BlockSystem::new(&["u", "nu"], &[n, w.len()]);
    s.add(0, 0, 1.0, Block::Sparse(a.clone()))?;
    s.add(0, 1, 1.0, Block::Columns(w.clone()))?;
    s.add(1, 0, 1.0, Block::ColumnsTranspose(w))?;
    s.set_rhs(0, b)?;
    Ok(s)
}

pub fn precond_b1(h: &CholeskyFactor<f64>) -> BlockDiagonal<'_> {
    BlockDiagonal::new(vec![Box::new(h), Box::new(Identity(6))])
}

pub fn precond_bm(a_plus_m: &CholeskyFactor<f64>) -> BlockDiagonal<'_> {
    BlockDiagonal::new(vec![Box::new(a_plus_m), Box::new(Identity(6))])
}

/// `(A + W Wᵀ)⁻¹` applied by CG preconditioned with `(A + M)⁻¹`.
pub struct InnerInverse<'a> {
    pub op: LowRankUpdate<'a>,
    pub precond: &'a CholeskyFactor<f64>,
    pub stop: StoppingRule,
}

impl LinearOperator<f64> for InnerInverse<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if x.iter().all(|&v| v == 0.0) {
            y.fill(0.0);
            return;
        }
        let r = cg(&self.op, self.precond, x, &vec![0.0; x.len()], &self.stop);
        y.copy_from_slice(&r.solution);
    }
}

/// Inner tolerance for composed preconditioner blocks.
pub const INNER_RTOL: f64 = 1e-12;

pub fn precond_be<'a>(
    a: &'a CsrMatrix<f64>,
    basis: &'a RigidBasis,
    a_plus_m: &'a CholeskyFactor<f64>,
) -> BlockDiagonal<'a> {
    let inner = InnerInverse {
        op: LowRankUpdate {
            a,
            cols: basis.w_columns(),
        },
        precond: a_plus_m,
        stop: StoppingRule::relative(INNER_RTOL, 1000),
    };
    BlockDiagonal::new(vec![Box::new(inner), Box::new(Identity(6))])
}

#[derive(Debug, Clone)]
pub struct LagrangeSolution {
    pub u: Vec<f64>,
    pub multiplier: [f64; 6],
    pub report: SolveReport<f64>,
}

/// MinRes on a Lagrange system from `x0` (zero when `None`).
pub fn solve_lagrange(
    system: &BlockSystem,
    precond: &dyn LinearOperator<f64>,
    x0: Option<&[f64]>,
    stop: &StoppingRule,
) -> LagrangeSolution {
    let n = system.dim();
    let zero = vec![0.0; n];
    let report = minres(system, precond, &system.rhs, x0.unwrap_or(&zero), stop);
    let split = system.sizes[0];
    let u = report.solution[..split].to_vec();
    let multiplier = std::array::from_fn(|k| report.solution[split + k]);
    LagrangeSolution {
        u,
        multiplier,
        report,
    }
}

/// The natural-norm operator `x ↦ A x + W (Wᵀ x)`.
pub fn natural_norm_operator<'a>(
    a: &'a CsrMatrix<f64>,
    basis: &'a RigidBasis,
) -> LowRankUpdate<'a> {
    LowRankUpdate {
        a,
        cols: basis.w_columns(),
    }
}

/// CG on `(A + W Wᵀ) u = Pᵀ b` preconditioned by `(A + M)⁻¹`; no projection
/// of the result.
pub fn solve_natural_norm(
    a: &CsrMatrix<f64>,
    basis: &RigidBasis,
    a_plus_m: &CholeskyFactor<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    stop: &StoppingRule,
) -> Result<SolveReport<f64>, FormulationError> {
    require_l2(basis)?;
    let rhs = basis.project_pt(b)?;
    let op = natural_norm_operator(a, basis);
    let zero = vec![0.0; rhs.len()];
    Ok(cg(&op, a_plus_m, &rhs, x0.unwrap_or(&zero), stop))
}
