//! Kernel removal by prescribing the exact solution at a few mesh points.

use std::collections::BTreeSet;

use super::FormulationError;
use crate::fem::{Family, FunctionSpace};
use crate::linalg::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PinStrategy {
    /// Corners 1, 2, 4 of the box with 1, 2 and 3 components.
    #[serde(rename = "3circ")]
    ThreeCirc,
    /// All components at the vertices of the first boundary facet.
    #[serde(rename = "1tri")]
    OneTri,
    /// All components at the vertices of three boundary facets on different faces.
    #[serde(rename = "3tri")]
    ThreeTri,
    /// All components at corners 1, 2 and 4.
    #[serde(rename = "3dot")]
    ThreeDot,
    /// The single dof at corner 0 of a scalar problem.
    #[serde(rename = "poisson-corner")]
    PoissonCorner,
}

impl std::fmt::Display for PinStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PinStrategy::ThreeCirc => "3circ",
            PinStrategy::OneTri => "1tri",
            PinStrategy::ThreeTri => "3tri",
            PinStrategy::ThreeDot => "3dot",
            PinStrategy::PoissonCorner => "poisson-corner",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct PinnedSystem {
    pub a: CsrMatrix<f64>,
    pub b: Vec<f64>,
    /// Constrained dofs, ascending.
    pub dofs: Vec<usize>,
}

/// Dofs a strategy constrains on `space` (P1 only).
pub fn pinned_dofs(
    space: &FunctionSpace,
    strategy: PinStrategy,
) -> Result<Vec<usize>, FormulationError> {
    let mesh = space.mesh();
    let vector = match (space.family(), strategy) {
        (Family::P1Scalar, PinStrategy::PoissonCorner) => false,
        (Family::P1Vector, s) if s != PinStrategy::PoissonCorner => true,
        _ => {
            return Err(FormulationError::Pinpoint(format!(
                "strategy {strategy} does not apply to {:?}",
                space.family()
            )))
        }
    };
    let mut set = BTreeSet::new();
    let mut all = |v: usize| {
        for c in 0..3 {
            set.insert(3 * v + c);
        }
    };
    match strategy {
        PinStrategy::PoissonCorner => {
            debug_assert!(!vector);
            set.insert(mesh.corners[0]);
        }
        PinStrategy::ThreeCirc => {
            for (i, corner) in [1usize, 2, 4].into_iter().enumerate() {
                let v = mesh.corners[corner];
                for c in 0..=i {
                    set.insert(3 * v + c);
                }
            }
        }
        PinStrategy::ThreeDot => {
            for corner in [1usize, 2, 4] {
                all(mesh.corners[corner]);
            }
        }
        PinStrategy::OneTri => {
            let f = mesh
                .boundary_facets
                .first()
                .ok_or_else(|| FormulationError::Pinpoint("mesh has no boundary facets".into()))?;
            f.vertices.iter().for_each(|&v| all(v));
        }
        PinStrategy::ThreeTri => {
            let mut normals: Vec<[f64; 3]> = Vec::new();
            for f in &mesh.boundary_facets {
                let new_face = normals
                    .iter()
                    .all(|n| n.iter().zip(&f.normal).map(|(a, b)| a * b).sum::<f64>() < 1.0 - 1e-8);
                if new_face {
                    normals.push(f.normal);
                    f.vertices.iter().for_each(|&v| all(v));
                    if normals.len() == 3 {
                        break;
                    }
                }
            }
            if normals.len() < 3 {
                return Err(FormulationError::Pinpoint(
                    "fewer than three boundary faces".into(),
                ));
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Symmetric elimination of `dofs` with values taken from `exact`: constrained
/// rows and columns are zeroed, their diagonal set to one, and the load
/// corrected by the eliminated couplings.
pub fn pinpoint_dofs(a: &CsrMatrix<f64>, b: &[f64], dofs: &[usize], exact: &[f64]) -> PinnedSystem {
    let n = a.nrows();
    let mut fixed = vec![false; n];
    for &d in dofs {
        fixed[d] = true;
    }
    let mut rhs = b.to_vec();
    let mut out = a.clone();
    let row_ptr = a.row_ptr().to_vec();
    let col_idx = a.col_idx().to_vec();
    let vals = out.values_mut();
    for r in 0..n {
        for k in row_ptr[r]..row_ptr[r + 1] {
            let c = col_idx[k];
            if fixed[r] || fixed[c] {
                if !fixed[r] {
                    rhs[r] -= vals[k] * exact[c];
                }
                vals[k] = if r == c { 1.0 } else { 0.0 };
            }
        }
    }
    for &d in dofs {
        rhs[d] = exact[d];
    }
    PinnedSystem {
        a: out,
        b: rhs,
        dofs: dofs.to_vec(),
    }
}

pub fn pinpoint(
    a: &CsrMatrix<f64>,
    b: &[f64],
    space: &FunctionSpace,
    strategy: PinStrategy,
    exact: &[f64],
) -> Result<PinnedSystem, FormulationError> {
    let dofs = pinned_dofs(space, strategy)?;
    Ok(pinpoint_dofs(a, b, &dofs, exact))
}
