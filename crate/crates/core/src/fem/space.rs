//! Lagrange spaces on tetrahedral meshes.

use std::sync::Arc;

use crate::mesh::{Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Family {
    P1Scalar,
    P1Vector,
    P2Vector,
}

impl Family {
    pub fn value_dim(self) -> usize {
        match self {
            Family::P1Scalar => 1,
            Family::P1Vector | Family::P2Vector => 3,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Family::P1Scalar | Family::P1Vector => 1,
            Family::P2Vector => 2,
        }
    }

    pub fn nodes_per_cell(self) -> usize {
        if self.degree() == 1 {
            4
        } else {
            10
        }
    }
}

/// Local edge numbering of a tetrahedron; P2 edge node `4 + e` sits on `LOCAL_EDGES[e]`.
pub const LOCAL_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Nodal basis on one cell. Nodes are numbered globally; vector spaces
/// interleave components so dof `3 * node + c` carries component `c`.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    family: Family,
    nodes: Vec<Point>,
    cell_nodes: Vec<usize>,
}

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh>, family: Family) -> Self {
        let nv = mesh.num_vertices();
        let npc = family.nodes_per_cell();
        let mut cell_nodes = Vec::with_capacity(npc * mesh.num_cells());
        let mut nodes: Vec<Point> = mesh.vertices.clone();
        if family.degree() == 1 {
            for cell in &mesh.cells {
                cell_nodes.extend_from_slice(cell);
            }
        } else {
            // edges numbered in sorted (low, high) vertex order
            let mut edges: Vec<[usize; 2]> = mesh
                .cells
                .iter()
                .flat_map(|cell| LOCAL_EDGES.map(|[a, b]| sorted_pair(cell[a], cell[b])))
                .collect();
            edges.sort_unstable();
            edges.dedup();
            for &[a, b] in &edges {
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                nodes.push([0, 1, 2].map(|k| 0.5 * (pa[k] + pb[k])));
            }
            for cell in &mesh.cells {
                cell_nodes.extend_from_slice(cell);
                for [a, b] in LOCAL_EDGES {
                    let key = sorted_pair(cell[a], cell[b]);
                    let e = edges.binary_search(&key).expect("edge collected above");
                    cell_nodes.push(nv + e);
                }
            }
        }
        Self {
            mesh,
            family,
            nodes,
            cell_nodes,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn value_dim(&self) -> usize {
        self.family.value_dim()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn dof_count(&self) -> usize {
        self.value_dim() * self.nodes.len()
    }

    pub fn node_coordinates(&self) -> &[Point] {
        &self.nodes
    }

    /// Coordinates of each dof (the node it sits on).
    pub fn dof_coordinates(&self) -> Vec<Point> {
        let d = self.value_dim();
        self.nodes
            .iter()
            .flat_map(|p| std::iter::repeat_n(*p, d))
            .collect()
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        let npc = self.family.nodes_per_cell();
        &self.cell_nodes[c * npc..(c + 1) * npc]
    }

    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let d = self.value_dim();
        self.cell_nodes(c)
            .iter()
            .flat_map(|&n| (0..d).map(move |k| d * n + k))
            .collect()
    }

    pub fn same_mesh(&self, other: &FunctionSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Affine map data of one tetrahedron.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub points: [Point; 4],
    pub volume: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [[f64; 3]; 4],
}

impl CellGeometry {
    pub fn new(points: [Point; 4]) -> Self {
        let p0 = points[0];
        let e = [1, 2, 3].map(|k| [0, 1, 2].map(|i| points[k][i] - p0[i]));
        // rows of J⁻ᵀ where J has columns e1, e2, e3: gradient of λ_k is (e_j × e_l) / det
        let c23 = crate::mesh::cross(&e[1], &e[2]);
        let c31 = crate::mesh::cross(&e[2], &e[0]);
        let c12 = crate::mesh::cross(&e[0], &e[1]);
        let det = crate::mesh::dot3(&e[0], &c23);
        let g1 = c23.map(|x| x / det);
        let g2 = c31.map(|x| x / det);
        let g3 = c12.map(|x| x / det);
        let g0 = [0, 1, 2].map(|i| -(g1[i] + g2[i] + g3[i]));
        Self {
            points,
            volume: det / 6.0,
            grad_bary: [g0, g1, g2, g3],
        }
    }

    pub fn map(&self, bary: &[f64; 4]) -> Point {
        let mut x = [0.0; 3];
        for (l, p) in bary.iter().zip(&self.points) {
            for k in 0..3 {
                x[k] += l * p[k];
            }
        }
        x
    }
}

/// Scalar nodal basis values at a barycentric point.
pub fn basis_values(degree: usize, l: &[f64; 4], out: &mut [f64]) {
    if degree == 1 {
        out[..4].copy_from_slice(l);
    } else {
        for i in 0..4 {
            out[i] = l[i] * (2.0 * l[i] - 1.0);
        }
        for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            out[4 + e] = 4.0 * l[*a] * l[*b];
        }
    }
}

/// Scalar nodal basis gradients at a barycentric point.
pub fn basis_gradients(degree: usize, l: &[f64; 4], g: &[[f64; 3]; 4], out: &mut [[f64; 3]]) {
    if degree == 1 {
        out[..4].copy_from_slice(g);
    } else {
        for i in 0..4 {
            let s = 4.0 * l[i] - 1.0;
            out[i] = g[i].map(|x| s * x);
        }
        for (e, &[a, b]) in LOCAL_EDGES.iter().enumerate() {
            out[4 + e] = [0, 1, 2].map(|k| 4.0 * (l[a] * g[b][k] + l[b] * g[a][k]));
        }
    }
}
