//! Spectral bounds of preconditioned saddle systems, `S x = λ N x`.

use super::block::BlockSystem;
use super::lagrange::build_lagrange;
use super::FormulationError;
use crate::linalg::{generalized_sym_eigvals, CsrMatrix, DenseMatrix};
use crate::rigid::RigidBasis;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralBounds {
    pub size: usize,
    pub neg_min: f64,
    pub neg_max: f64,
    pub pos_min: f64,
    pub pos_max: f64,
    /// `max |λ| / min |λ|`
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenPrecond {
    /// `N = diag(A + W Wᵀ, I)`
    Be,
    /// `N = diag(A + M, I)`
    Bm,
}

pub fn eigen_bounds(
    system: &BlockSystem,
    n_mat: &DenseMatrix<f64>,
) -> Result<SpectralBounds, FormulationError> {
    let s = system.to_dense()?;
    let vals = generalized_sym_eigvals(&s, n_mat)?;
    bounds_from_values(&vals)
}

pub fn bounds_from_values(vals: &[f64]) -> Result<SpectralBounds, FormulationError> {
    let neg: Vec<f64> = vals.iter().copied().filter(|v| *v < 0.0).collect();
    let pos: Vec<f64> = vals.iter().copied().filter(|v| *v > 0.0).collect();
    if neg.is_empty() || pos.is_empty() || neg.len() + pos.len() != vals.len() {
        return Err(FormulationError::Spectrum(
            "expected a nonsingular indefinite spectrum",
        ));
    }
    let fold = |xs: &[f64], f: fn(f64, f64) -> f64, init: f64| xs.iter().copied().fold(init, f);
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    Ok(SpectralBounds {
        size: vals.len(),
        neg_min: fold(&neg, f64::min, f64::INFINITY),
        neg_max: fold(&neg, f64::max, f64::NEG_INFINITY),
        pos_min: fold(&pos, f64::min, f64::INFINITY),
        pos_max: fold(&pos, f64::max, f64::NEG_INFINITY),
        kappa: fold(&abs, f64::max, 0.0) / fold(&abs, f64::min, f64::INFINITY),
    })
}

/// Lagrange system and the dense `N` of the chosen preconditioner.
pub fn lagrange_eigen_problem(
    a: &Arc<CsrMatrix<f64>>,
    m: &CsrMatrix<f64>,
    basis: &RigidBasis,
    which: EigenPrecond,
) -> Result<(BlockSystem, DenseMatrix<f64>), FormulationError> {
    let nu = a.nrows();
    let system = build_lagrange(a, basis, &vec![0.0; nu])?;
    let n = nu + 6;
    let mut n_mat = DenseMatrix::zeros(n, n);
    let a_dense = a.to_dense();
    for i in 0..nu {
        for j in 0..nu {
            n_mat[(i, j)] = a_dense[(i, j)];
        }
    }
    match which {
        EigenPrecond::Be => {
            for w in basis.w_columns() {
                for i in 0..nu {
                    for j in 0..nu {
                        n_mat[(i, j)] += w[i] * w[j];
                    }
                }
            }
        }
        EigenPrecond::Bm => {
            for i in 0..nu {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    n_mat[(i, j)] += v;
                }
            }
        }
    }
    for k in nu..n {
        n_mat[(k, k)] = 1.0;
    }
    Ok((system, n_mat))
}
