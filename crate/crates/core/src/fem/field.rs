//! Coefficient vectors, interpolation and error norms.

use std::sync::Arc;

use super::quadrature::tet_rule;
use super::space::{basis_gradients, basis_values, CellGeometry, FunctionSpace};
use crate::mesh::Point;

/// A finite element function: nodal coefficients in a space.
#[derive(Debug, Clone)]
pub struct Field {
    pub space: Arc<FunctionSpace>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(space: Arc<FunctionSpace>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), space.dof_count(), "coefficient length");
        Self { space, values }
    }

    /// Nodal values grouped per node (first three components; missing ones are zero).
    pub fn node_vectors(&self) -> Vec<Point> {
        let d = self.space.value_dim();
        self.values
            .chunks(d)
            .map(|c| {
                let mut p = [0.0; 3];
                p[..d].copy_from_slice(c);
                p
            })
            .collect()
    }
}

/// Nodal interpolant; for scalar spaces only the first component of `g` is used.
pub fn interpolate(space: &Arc<FunctionSpace>, g: &dyn Fn(&Point) -> [f64; 3]) -> Field {
    let d = space.value_dim();
    let mut values = Vec::with_capacity(space.dof_count());
    for p in space.node_coordinates() {
        let v = g(p);
        values.extend_from_slice(&v[..d]);
    }
    Field {
        space: space.clone(),
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorNorms {
    pub l2_error: f64,
    pub h1_error: f64,
}

/// `‖u_h − u‖₀` and `‖u_h − u‖₁` with a rule of degree `degree`.
/// `grad[c][k]` is `∂u_c/∂x_k`.
pub fn error_norms_with_degree(
    field: &Field,
    exact: &dyn Fn(&Point) -> [f64; 3],
    grad: &dyn Fn(&Point) -> [[f64; 3]; 3],
    degree: usize,
) -> ErrorNorms {
    let space = &field.space;
    let mesh = space.mesh();
    let d = space.value_dim();
    let p = space.family().degree();
    let npc = space.family().nodes_per_cell();
    let rule = tet_rule(degree);
    let mut phi = vec![0.0; npc];
    let mut dphi = vec![[0.0; 3]; npc];
    let (mut l2, mut semi) = (0.0, 0.0);
    for cell in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh.cell_points(cell));
        let nodes = space.cell_nodes(cell);
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map(l);
            basis_values(p, l, &mut phi);
            basis_gradients(p, l, &geo.grad_bary, &mut dphi);
            let mut uh = [0.0; 3];
            let mut guh = [[0.0; 3]; 3];
            for (a, &n) in nodes.iter().enumerate() {
                for c in 0..d {
                    let coef = field.values[d * n + c];
                    uh[c] += coef * phi[a];
                    for k in 0..3 {
                        guh[c][k] += coef * dphi[a][k];
                    }
                }
            }
            let u = exact(&x);
            let gu = grad(&x);
            let wq = w * 6.0 * geo.volume;
            for c in 0..d {
                l2 += wq * (uh[c] - u[c]).powi(2);
                for k in 0..3 {
                    semi += wq * (guh[c][k] - gu[c][k]).powi(2);
                }
            }
        }
    }
    ErrorNorms {
        l2_error: l2.sqrt(),
        h1_error: (l2 + semi).sqrt(),
    }
}

pub fn error_norms(
    field: &Field,
    exact: &dyn Fn(&Point) -> [f64; 3],
    grad: &dyn Fn(&Point) -> [[f64; 3]; 3],
) -> ErrorNorms {
    error_norms_with_degree(field, exact, grad, 6)
}

/// `‖u_h‖₁` of a field.
pub fn h1_norm(field: &Field) -> f64 {
    error_norms_with_degree(field, &|_| [0.0; 3], &|_| [[0.0; 3]; 3], 4).h1_error
}
