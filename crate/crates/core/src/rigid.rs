//! Orthonormal rigid-motion bases and the projectors built on them.

use std::sync::Arc;

use crate::fem::{
    assemble_form, quadrature::tet_rule, quadrature::tri_rule, CellGeometry, FormKind,
    FunctionSpace,
};
use crate::linalg::{jacobi_eig3, CsrMatrix};
use crate::mesh::{cross, sub, Mesh, Point};

/// Inner product the basis is orthonormal in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BasisMode {
    /// `(u, v)` over the domain.
    L2,
    /// Euclidean product of coefficient vectors.
    Ell2,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RigidError {
    #[error("rigid motions need a vector-valued space")]
    ScalarSpace,
    #[error("degenerate domain: {0}")]
    Degenerate(&'static str),
    #[error("operation needs a {expected:?} basis, got {found:?}")]
    ModeMismatch {
        expected: BasisMode,
        found: BasisMode,
    },
    #[error("vector length {found} does not match {expected} dofs")]
    Dimension { expected: usize, found: usize },
}

/// `z(x) = translation + (x − center) × axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub center: Point,
    pub translation: Point,
    pub axis: Point,
}

impl RigidMotion {
    pub fn eval(&self, x: &Point) -> Point {
        let r = cross(&sub(x, &self.center), &self.axis);
        [0, 1, 2].map(|k| self.translation[k] + r[k])
    }

    /// Constant gradient, `grad[c][k] = ∂z_c/∂x_k`.
    pub fn gradient(&self) -> [[f64; 3]; 3] {
        // (x × a)_c = ε_{cjk} x_j a_k
        let a = self.axis;
        [[0.0, a[2], -a[1]], [-a[2], 0.0, a[0]], [a[1], -a[0], 0.0]]
    }
}

/// Six rigid motions orthonormal in the chosen inner product, with their
/// primal (`Y`, nodal interpolants) and dual (`W`) representations.
/// In `L2` mode `W = M Y`; in `Ell2` mode `W = Y = Z`.
#[derive(Debug, Clone)]
pub struct RigidBasis {
    pub mode: BasisMode,
    pub center: Point,
    pub measure: f64,
    /// Inertia eigenpairs, eigenvalues descending.
    pub inertia_eigs: [(f64, Point); 3],
    pub motions: [RigidMotion; 6],
    y: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
}

/// Volume, centroid and second moment tensor `∫ (x−c)(x−c)ᵀ`, each exact per tetrahedron.
pub fn geometric_moments(mesh: &Mesh) -> (f64, Point, [[f64; 3]; 3]) {
    let mut vol = 0.0;
    let mut first = [0.0; 3];
    for c in 0..mesh.num_cells() {
        let pts = mesh.cell_points(c);
        let v = mesh.cell_volume(c);
        vol += v;
        for k in 0..3 {
            first[k] += v * 0.25 * (pts[0][k] + pts[1][k] + pts[2][k] + pts[3][k]);
        }
    }
    let center = first.map(|x| x / vol);
    let mut q = [[0.0; 3]; 3];
    for c in 0..mesh.num_cells() {
        let pts = mesh.cell_points(c).map(|p| sub(&p, &center));
        let v = mesh.cell_volume(c);
        let s = [0, 1, 2].map(|k| pts.iter().map(|p| p[k]).sum::<f64>());
        for a in 0..3 {
            for b in 0..3 {
                let vv: f64 = pts.iter().map(|p| p[a] * p[b]).sum();
                q[a][b] += v / 20.0 * (vv + s[a] * s[b]);
            }
        }
    }
    (vol, center, q)
}

fn inertia_from_second_moment(q: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let tr = q[0][0] + q[1][1] + q[2][2];
    let mut t = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            t[a][b] = if a == b { tr } else { 0.0 } - q[a][b];
        }
    }
    t
}

impl RigidBasis {
    /// `L2`-orthonormal basis; `mass` must be the vector mass matrix of `space`.
    pub fn l2(space: &FunctionSpace, mass: &CsrMatrix<f64>) -> Result<Self, RigidError> {
        if space.value_dim() != 3 {
            return Err(RigidError::ScalarSpace);
        }
        if mass.nrows() != space.dof_count() {
            return Err(RigidError::Dimension {
                expected: space.dof_count(),
                found: mass.nrows(),
            });
        }
        let (vol, center, q) = geometric_moments(space.mesh());
        let mut basis = Self::from_moments(space, BasisMode::L2, vol, center, q)?;
        basis.w = basis.y.iter().map(|y| mass.mul_vec(y)).collect();
        Ok(basis)
    }

    /// Basis orthonormal in the Euclidean product of coefficient vectors.
    pub fn ell2(space: &FunctionSpace) -> Result<Self, RigidError> {
        if space.value_dim() != 3 {
            return Err(RigidError::ScalarSpace);
        }
        let nodes = space.node_coordinates();
        let n = nodes.len() as f64;
        let mut center = [0.0; 3];
        for p in nodes {
            for k in 0..3 {
                center[k] += p[k] / n;
            }
        }
        let mut q = [[0.0; 3]; 3];
        for p in nodes {
            let d = sub(p, &center);
            for a in 0..3 {
                for b in 0..3 {
                    q[a][b] += d[a] * d[b];
                }
            }
        }
        let mut basis = Self::from_moments(space, BasisMode::Ell2, n, center, q)?;
        basis.w = basis.y.clone();
        Ok(basis)
    }

    /// Either mode; `L2` assembles the vector mass matrix itself.
    pub fn new(space: &FunctionSpace, mode: BasisMode) -> Result<Self, RigidError> {
        match mode {
            BasisMode::Ell2 => Self::ell2(space),
            BasisMode::L2 => {
                let m = assemble_form(FormKind::VectorMass, space, space)
                    .map_err(|_| RigidError::ScalarSpace)?;
                Self::l2(space, &m)
            }
        }
    }

    fn from_moments(
        space: &FunctionSpace,
        mode: BasisMode,
        measure: f64,
        center: Point,
        q: [[f64; 3]; 3],
    ) -> Result<Self, RigidError> {
        if !(measure > 0.0) {
            return Err(RigidError::Degenerate("zero measure"));
        }
        let (vals, vecs) = jacobi_eig3(inertia_from_second_moment(&q));
        if !(vals[2] > 1e-14 * vals[0].abs()) {
            return Err(RigidError::Degenerate("singular inertia tensor"));
        }
        let inertia_eigs = [0, 1, 2].map(|i| (vals[i], vecs[i]));
        let st = measure.powf(-0.5);
        let zero = [0.0; 3];
        let motions: [RigidMotion; 6] = std::array::from_fn(|k| {
            if k < 3 {
                RigidMotion {
                    center,
                    translation: vecs[k].map(|x| st * x),
                    axis: zero,
                }
            } else {
                let s = vals[k - 3].powf(-0.5);
                RigidMotion {
                    center,
                    translation: zero,
                    axis: vecs[k - 3].map(|x| s * x),
                }
            }
        });
        let nodes = space.node_coordinates();
        let y = motions
            .iter()
            .map(|z| nodes.iter().flat_map(|p| z.eval(p)).collect::<Vec<f64>>())
            .collect();
        Ok(Self {
            mode,
            center,
            measure,
            inertia_eigs,
            motions,
            y,
            w: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.y[0].len()
    }

    /// Primal column `k`.
    pub fn y(&self, k: usize) -> &[f64] {
        &self.y[k]
    }

    /// Dual column `k`.
    pub fn w(&self, k: usize) -> &[f64] {
        &self.w[k]
    }

    pub fn y_columns(&self) -> &[Vec<f64>] {
        &self.y
    }

    pub fn w_columns(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// `Yᵀ x`
    pub fn yt(&self, x: &[f64]) -> [f64; 6] {
        std::array::from_fn(|k| dot(&self.y[k], x))
    }

    /// `Wᵀ x`
    pub fn wt(&self, x: &[f64]) -> [f64; 6] {
        std::array::from_fn(|k| dot(&self.w[k], x))
    }

    /// `Y c`
    pub fn y_combine(&self, c: &[f64; 6]) -> Vec<f64> {
        combine(&self.y, c)
    }

    /// `W c`
    pub fn w_combine(&self, c: &[f64; 6]) -> Vec<f64> {
        combine(&self.w, c)
    }

    fn check(&self, mode: BasisMode, x: &[f64]) -> Result<(), RigidError> {
        if self.mode != mode {
            return Err(RigidError::ModeMismatch {
                expected: mode,
                found: self.mode,
            });
        }
        if x.len() != self.dim() {
            return Err(RigidError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `P_Z x = x − Z Zᵀ x`
    pub fn project_pz(&self, x: &[f64]) -> Result<Vec<f64>, RigidError> {
        self.check(BasisMode::Ell2, x)?;
        Ok(subtract(x, &self.y, &self.yt(x)))
    }

    /// `P x = x − Y Wᵀ x`: removes the `L2` projection onto rigid motions.
    pub fn project_p(&self, x: &[f64]) -> Result<Vec<f64>, RigidError> {
        self.check(BasisMode::L2, x)?;
        Ok(subtract(x, &self.y, &self.wt(x)))
    }

    /// `Pᵀ b = b − W Yᵀ b`: makes a load vector vanish on rigid motions.
    pub fn project_pt(&self, b: &[f64]) -> Result<Vec<f64>, RigidError> {
        self.check(BasisMode::L2, b)?;
        Ok(subtract(b, &self.w, &self.yt(b)))
    }

    /// `max_k |W_kᵀ u|`; in `L2` mode this is `max_k |(u_h, z_k)|`.
    pub fn orthogonality_error(&self, u: &[f64]) -> f64 {
        self.wt(u).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(cols: &[Vec<f64>], c: &[f64; 6]) -> Vec<f64> {
    let mut out = vec![0.0; cols[0].len()];
    for (col, &ck) in cols.iter().zip(c) {
        for (o, v) in out.iter_mut().zip(col) {
            *o += ck * v;
        }
    }
    out
}

fn subtract(x: &[f64], cols: &[Vec<f64>], c: &[f64; 6]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (col, &ck) in cols.iter().zip(c) {
        for (o, v) in out.iter_mut().zip(col) {
            *o -= ck * v;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Compatibility {
    pub net_force: Point,
    pub net_torque: Point,
}

/// `∫f + ∫h` and `∫f×x + ∫h×x` with degree-6 rules.
pub fn check_compatibility(
    f: &dyn Fn(&Point) -> Point,
    h: Option<&dyn Fn(&Point, &Point) -> Point>,
    mesh: &Mesh,
) -> Compatibility {
    let mut force = [0.0; 3];
    let mut torque = [0.0; 3];
    let mut add = |x: &Point, v: Point, w: f64| {
        let t = cross(&v, x);
        for k in 0..3 {
            force[k] += w * v[k];
            torque[k] += w * t[k];
        }
    };
    let rule = tet_rule(6);
    for c in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh.cell_points(c));
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map(l);
            add(&x, f(&x), w * 6.0 * geo.volume);
        }
    }
    if let Some(h) = h {
        let frule = tri_rule(6);
        for facet in &mesh.boundary_facets {
            let [a, b, d] = facet.vertices.map(|v| mesh.vertices[v]);
            let area = mesh.facet_area(facet);
            for (s, &w) in frule.points.iter().zip(&frule.weights) {
                let x = [0, 1, 2].map(|k| s[0] * a[k] + s[1] * b[k] + s[2] * d[k]);
                add(&x, h(&x, &facet.normal), w * 2.0 * area);
            }
        }
    }
    Compatibility {
        net_force: force,
        net_torque: torque,
    }
}

/// Shares one mesh between the vector space and both bases.
pub fn bases_for(
    space: &Arc<FunctionSpace>,
    mass: &CsrMatrix<f64>,
) -> Result<(RigidBasis, RigidBasis), RigidError> {
    Ok((RigidBasis::l2(space, mass)?, RigidBasis::ell2(space)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Family;
    use crate::mesh::{build_box_mesh, Grading, MeshParams};

    #[test]
    fn centered_unit_cube_moments() {
        let mesh = build_box_mesh([[-0.5, 0.5]; 3], [3; 3], Grading::Uniform).unwrap();
        let space = FunctionSpace::new(Arc::new(mesh), Family::P1Vector);
        let b = RigidBasis::new(&space, BasisMode::L2).unwrap();
        assert!(b.center.iter().all(|c| c.abs() < 1e-15));
        assert!((b.measure - 1.0).abs() < 1e-14);
        for (l, _) in b.inertia_eigs {
            assert!((l - 1.0 / 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_mismatch_is_reported() {
        let space = FunctionSpace::new(
            Arc::new(MeshParams::unit_cube(1).build().unwrap()),
            Family::P1Vector,
        );
        let l2 = RigidBasis::new(&space, BasisMode::L2).unwrap();
        let e2 = RigidBasis::ell2(&space).unwrap();
        let x = vec![1.0; space.dof_count()];
        assert!(matches!(
            l2.project_pz(&x),
            Err(RigidError::ModeMismatch { .. })
        ));
        assert!(e2.project_p(&x).is_err());
        assert!(e2.project_pt(&x).is_err());
        assert!(l2.project_p(&x[1..]).is_err());
    }

    #[test]
    fn scalar_space_rejected() {
        let space = FunctionSpace::new(
            Arc::new(MeshParams::unit_cube(1).build().unwrap()),
            Family::P1Scalar,
        );
        assert!(matches!(
            RigidBasis::ell2(&space),
            Err(RigidError::ScalarSpace)
        ));
    }

    #[test]
    fn constant_force_on_cube() {
        let mesh = MeshParams::unit_cube(2).build().unwrap();
        let c = check_compatibility(&|_| [0.0, 0.0, 1.0], None, &mesh);
        assert!((c.net_force[2] - 1.0).abs() < 1e-14);
        assert!(c.net_force[0].abs() < 1e-15);
    }

    #[test]
    fn rotation_field_has_torque() {
        let mesh = MeshParams::unit_cube(2).build().unwrap();
        let z = RigidMotion {
            center: [0.5; 3],
            translation: [0.0; 3],
            axis: [0.0, 0.0, 1.0],
        };
        let c = check_compatibility(&|x| z.eval(x), None, &mesh);
        assert!(c.net_force.iter().all(|v| v.abs() < 1e-14));
        assert!(c.net_torque.iter().map(|v| v.abs()).fold(0.0, f64::max) > 0.1);
    }
}
