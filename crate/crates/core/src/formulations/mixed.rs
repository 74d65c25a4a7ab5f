//! Taylor–Hood mixed formulations with a solid pressure `p = λ ∇·u`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::block::{Block, BlockDiagonal, BlockSystem};
use super::FormulationError;
use crate::fem::{assemble_form, Family, FormKind, FunctionSpace};
use crate::krylov::{Identity, LinearOperator};
use crate::linalg::{CholeskyFactor, CsrMatrix};
use crate::rigid::{BasisMode, RigidBasis};

/// Second Lamé constant; `Infinite` drops the pressure mass block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Finite(f64),
    Infinite,
}

impl Lambda {
    /// Coefficient of `−C`, i.e. `1/λ`.
    pub fn inverse(self) -> Option<f64> {
        match self {
            Lambda::Finite(l) => Some(1.0 / l),
            Lambda::Infinite => None,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(l) => write!(f, "{l:e}"),
            Lambda::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Lambda::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|e| format!("invalid lambda {s:?}: {e}"))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(Lambda::Infinite);
        }
        if !(v > 0.0) {
            return Err(format!("lambda must be positive, got {s}"));
        }
        Ok(Lambda::Finite(v))
    }
}

impl serde::Serialize for Lambda {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Lambda {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Assembled blocks of the mixed problem.
#[derive(Debug, Clone)]
pub struct MixedBlocks {
    /// `2μ(ε(u), ε(v))`
    pub a: Arc<CsrMatrix<f64>>,
    /// `(p, ∇·v)`, rows indexed by displacement dofs.
    pub b: Arc<CsrMatrix<f64>>,
    /// Pressure mass.
    pub c: Arc<CsrMatrix<f64>>,
    /// Displacement vector mass.
    pub m: Arc<CsrMatrix<f64>>,
}

/// Assembles the mixed blocks; only the P2–P1 Taylor–Hood pair is accepted.
pub fn assemble_mixed(
    u: &FunctionSpace,
    p: &FunctionSpace,
    mu: f64,
) -> Result<MixedBlocks, FormulationError> {
    if u.family() != Family::P2Vector || p.family() != Family::P1Scalar {
        return Err(FormulationError::Spaces(
            "mixed formulation needs P2 vector displacement and P1 scalar pressure",
        ));
    }
    if !u.same_mesh(p) {
        return Err(FormulationError::Spaces(
            "displacement and pressure must share a mesh",
        ));
    }
    Ok(MixedBlocks {
        a: Arc::new(assemble_form(FormKind::EpsilonStiffness { mu }, u, u)?),
        b: Arc::new(assemble_form(FormKind::DivCoupling, p, u)?),
        c: Arc::new(assemble_form(FormKind::ScalarMass, p, p)?),
        m: Arc::new(assemble_form(FormKind::VectorMass, u, u)?),
    })
}

fn require_l2(basis: &RigidBasis, n: usize) -> Result<(), FormulationError> {
    if basis.mode != BasisMode::L2 {
        return Err(crate::rigid::RigidError::ModeMismatch {
            expected: BasisMode::L2,
            found: basis.mode,
        }
        .into());
    }
    if basis.dim() != n {
        return Err(crate::rigid::RigidError::Dimension {
            expected: n,
            found: basis.dim(),
        }
        .into());
    }
    Ok(())
}

/// `[[A, B, W], [Bᵀ, −C/λ, 0], [Wᵀ, 0, 0]]` with right-hand side `[b, 0, 0]`.
pub fn build_mixed_double(
    blocks: &MixedBlocks,
    basis: &RigidBasis,
    lambda: Lambda,
    b: &[f64],
) -> Result<BlockSystem, FormulationError> {
    let (nu, np) = (blocks.a.nrows(), blocks.c.nrows());
    require_l2(basis, nu)?;
    let w = Arc::new(basis.w_columns().to_vec());
    let mut s = BlockSystem::new(&["u", "p", "nu"], &[nu, np, w.len()]);
    s.add(0, 0, 1.0, Block::Sparse(blocks.a.clone()))?;
    s.add(0, 1, 1.0, Block::Sparse(blocks.b.clone()))?;
    s.add(1, 0, 1.0, Block::SparseTranspose(blocks.b.clone()))?;
    if let Some(inv) = lambda.inverse() {
        s.add(1, 1, -inv, Block::Sparse(blocks.c.clone()))?;
    }
    s.add(0, 2, 1.0, Block::Columns(w.clone()))?;
    s.add(2, 0, 1.0, Block::ColumnsTranspose(w))?;
    s.set_rhs(0, b)?;
    Ok(s)
}

/// `[[A + W Wᵀ, B], [Bᵀ, −C/λ]]` with right-hand side `[Pᵀ b, 0]`.
pub fn build_mixed_single(
    blocks: &MixedBlocks,
    basis: &RigidBasis,
    lambda: Lambda,
    b: &[f64],
) -> Result<BlockSystem, FormulationError> {
    let (nu, np) = (blocks.a.nrows(), blocks.c.nrows());
    require_l2(basis, nu)?;
    let w = Arc::new(basis.w_columns().to_vec());
    let mut s = BlockSystem::new(&["u", "p"], &[nu, np]);
    s.add(0, 0, 1.0, Block::Sparse(blocks.a.clone()))?;
    s.add(0, 0, 1.0, Block::Outer(w))?;
    s.add(0, 1, 1.0, Block::Sparse(blocks.b.clone()))?;
    s.add(1, 0, 1.0, Block::SparseTranspose(blocks.b.clone()))?;
    if let Some(inv) = lambda.inverse() {
        s.add(1, 1, -inv, Block::Sparse(blocks.c.clone()))?;
    }
    s.set_rhs(0, &basis.project_pt(b)?)?;
    Ok(s)
}

/// `diag((A + M)⁻¹, C⁻¹[, I])`; the identity block is present when
/// `with_multiplier` is set (double-saddle layout).
pub fn precond_mixed<'a>(
    a_plus_m: &'a CholeskyFactor<f64>,
    c: &'a CholeskyFactor<f64>,
    with_multiplier: bool,
) -> BlockDiagonal<'a> {
    let mut blocks: Vec<Box<dyn LinearOperator<f64> + 'a>> = vec![Box::new(a_plus_m), Box::new(c)];
    if with_multiplier {
        blocks.push(Box::new(Identity(6)));
    }
    BlockDiagonal::new(blocks)
}
