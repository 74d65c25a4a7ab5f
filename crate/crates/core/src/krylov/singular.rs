//! Solvers for the singular system `A u = b` whose kernel is the rigid motions.

use super::{cg, LinearOperator, SolveReport, StopReason, StoppingRule};
use crate::linalg::{generalized_sym_eig, CholeskyFactor, CsrMatrix, LinalgError, DENSE_LIMIT};
use crate::rigid::{BasisMode, RigidBasis, RigidError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsProjector {
    /// `P_Z = I − Z Zᵀ`
    Pz,
    /// `Pᵀ = I − W Yᵀ`
    Pt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolProjector {
    Pz,
    /// `P = I − Y Wᵀ`
    P,
    None,
}

#[derive(Debug, thiserror::Error)]
pub enum SingularError {
    #[error(transparent)]
    Rigid(#[from] RigidError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("right-hand side is not orthogonal to the kernel (|Zᵀb| / |b| = {0:e})")]
    Incompatible(f64),
    #[error("inner solve failed: {0:?}")]
    NotConverged(StopReason),
}

#[derive(Debug, Clone)]
pub struct SingularReport {
    pub report: SolveReport<f64>,
    /// `max_k |(u, z_k)|` with the `L2` basis.
    pub orth_l2: f64,
    /// `max_k |Zᵀ u|` with the Euclidean basis.
    pub orth_ell2: f64,
}

/// `P_Z K⁻¹ P_Z` for an SPD factor `K` (typically `A + M`).
pub struct ProjectedInverse<'a> {
    pub factor: &'a CholeskyFactor<f64>,
    pub basis: &'a RigidBasis,
}

impl LinearOperator<f64> for ProjectedInverse<'_> {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let px = self.basis.project_pz(x).expect("Euclidean basis");
        let k = self.factor.solve(&px);
        y.copy_from_slice(&self.basis.project_pz(&k).expect("Euclidean basis"));
    }
}

/// CG on `A u = b` with the chosen right-hand side and solution projectors.
/// Iterations start from zero. `l2` and `ell2` are the two rigid bases of the
/// same space.
#[allow(clippy::too_many_arguments)]
pub fn cg_singular(
    a: &CsrMatrix<f64>,
    l2: &RigidBasis,
    ell2: &RigidBasis,
    rhs: RhsProjector,
    sol: SolProjector,
    precond: &dyn LinearOperator<f64>,
    b_raw: &[f64],
    stop: &StoppingRule,
) -> Result<SingularReport, SingularError> {
    expect_mode(l2, BasisMode::L2)?;
    expect_mode(ell2, BasisMode::Ell2)?;
    let b = match rhs {
        RhsProjector::Pz => ell2.project_pz(b_raw)?,
        RhsProjector::Pt => l2.project_pt(b_raw)?,
    };
    let x0 = vec![0.0; b.len()];
    let mut report = cg(a, precond, &b, &x0, stop);
    report.solution = match sol {
        SolProjector::Pz => ell2.project_pz(&report.solution)?,
        SolProjector::P => l2.project_p(&report.solution)?,
        SolProjector::None => report.solution,
    };
    let orth_l2 = l2.orthogonality_error(&report.solution);
    let orth_ell2 = ell2.orthogonality_error(&report.solution);
    Ok(SingularReport {
        report,
        orth_l2,
        orth_ell2,
    })
}

fn expect_mode(basis: &RigidBasis, mode: BasisMode) -> Result<(), RigidError> {
    if basis.mode != mode {
        return Err(RigidError::ModeMismatch {
            expected: mode,
            found: basis.mode,
        });
    }
    Ok(())
}

/// Relative size of `Zᵀb` beyond which a right-hand side is rejected.
const COMPATIBILITY_TOL: f64 = 1e-6;

/// `x = A⁺ b` in the Euclidean sense: `A x = b`, `Zᵀx = 0`. Projected PCG with
/// preconditioner `P_Z (A+M)⁻¹ P_Z`.
pub fn pseudo_solve(
    a: &CsrMatrix<f64>,
    basis: &RigidBasis,
    b: &[f64],
    inner: &CholeskyFactor<f64>,
    stop: &StoppingRule,
) -> Result<Vec<f64>, SingularError> {
    expect_mode(basis, BasisMode::Ell2)?;
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bn == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let zb = basis.yt(b).iter().map(|v| v * v).sum::<f64>().sqrt();
    if zb > COMPATIBILITY_TOL * bn {
        return Err(SingularError::Incompatible(zb / bn));
    }
    let pb = basis.project_pz(b)?;
    let precond = ProjectedInverse {
        factor: inner,
        basis,
    };
    let report = cg(a, &precond, &pb, &vec![0.0; b.len()], stop);
    if !report.converged {
        return Err(SingularError::NotConverged(report.stop_reason));
    }
    Ok(basis.project_pz(&report.solution)?)
}

/// [`pseudo_solve`] packaged as a preconditioner.
pub struct PseudoInverse<'a> {
    pub a: &'a CsrMatrix<f64>,
    pub basis: &'a RigidBasis,
    pub inner: &'a CholeskyFactor<f64>,
    pub stop: StoppingRule,
}

impl LinearOperator<f64> for PseudoInverse<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        // inputs are residuals of a compatible system; strip rounding-level kernel parts
        let px = self.basis.project_pz(x).expect("Euclidean basis");
        let out = pseudo_solve(self.a, self.basis, &px, self.inner, &self.stop)
            .unwrap_or_else(|_| vec![f64::NAN; px.len()]);
        y.copy_from_slice(&out);
    }
}

/// Dense oracle: `x = U Γ⁻¹ Uᵀ Pᵀ b` from the generalized eigenpairs
/// `A U = M U Γ`, `Uᵀ M U = I`, with the six kernel pairs dropped.
pub fn m_pseudo_solve(
    a: &CsrMatrix<f64>,
    m: &CsrMatrix<f64>,
    basis: &RigidBasis,
    b: &[f64],
) -> Result<Vec<f64>, SingularError> {
    expect_mode(basis, BasisMode::L2)?;
    let n = a.nrows();
    if n > DENSE_LIMIT {
        return Err(LinalgError::TooLarge(n).into());
    }
    let eig = generalized_sym_eig(&a.to_dense(), &m.to_dense())?;
    let pb = basis.project_pt(b)?;
    let mut x = vec![0.0; n];
    // eigenvalues ascending and A is semidefinite: the kernel is the first six
    for k in 6..n {
        let u = eig.vectors.column(k);
        let c: f64 = u.iter().zip(&pb).map(|(p, q)| p * q).sum::<f64>() / eig.values[k];
        for (xi, ui) in x.iter_mut().zip(&u) {
            *xi += c * ui;
        }
    }
    Ok(x)
}
