#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rigid_neumann::fem::{assemble_form, h1_norm, Family, Field, FormKind, FunctionSpace};
use rigid_neumann::formulations::{build_lagrange, precond_bm, solve_lagrange, solve_natural_norm};
use rigid_neumann::harness::example_mesh_params;
use rigid_neumann::krylov::{
    cg_singular, ProjectedInverse, RhsProjector, SolProjector, StoppingRule,
};
use rigid_neumann::linalg::{sparse_cholesky, CholeskyFactor, CsrMatrix};
use rigid_neumann::mesh::{Grading, Mesh, MeshParams, Placement};
use rigid_neumann::rigid::RigidBasis;

/// Small meshes every invariant is checked on.
pub fn ci_meshes() -> Vec<(&'static str, Arc<Mesh>)> {
    let mut shifted = MeshParams::unit_cube(2);
    shifted.bounds = [[-0.5, 0.5]; 3];
    let mut rotated = MeshParams::unit_cube(2);
    rotated.placement = Some(Placement {
        angles: [0.3, -0.7, 1.1],
        translation: [1.0, -2.0, 0.5],
    });
    let mut vertex = MeshParams::unit_cube(3);
    vertex.grading = Grading::TowardVertex {
        corner: 0,
        beta: 2.0,
    };
    let cases = vec![
        ("cube-1", MeshParams::unit_cube(1)),
        ("cube-2-centered", shifted),
        ("cube-2-rotated", rotated),
        ("cube-3-vertex-graded", vertex),
        ("body-2", example_mesh_params(2, Grading::Uniform)),
        (
            "body-3-edge-graded",
            example_mesh_params(
                3,
                Grading::TowardEdge {
                    axis: 2,
                    corner: 0,
                    beta: 2.0,
                },
            ),
        ),
    ];
    cases
        .into_iter()
        .map(|(n, p)| (n, Arc::new(p.build().unwrap())))
        .collect()
}

pub struct Elastic {
    pub space: Arc<FunctionSpace>,
    pub a: Arc<CsrMatrix<f64>>,
    pub m: CsrMatrix<f64>,
    pub l2: RigidBasis,
    pub ell2: RigidBasis,
}

impl Elastic {
    pub fn new(mesh: &Arc<Mesh>, family: Family, mu: f64, lambda: f64) -> Self {
        let space = Arc::new(FunctionSpace::new(mesh.clone(), family));
        let a = assemble_form(FormKind::ElasticStiffness { mu, lambda }, &space, &space).unwrap();
        let m = assemble_form(FormKind::VectorMass, &space, &space).unwrap();
        let l2 = RigidBasis::l2(&space, &m).unwrap();
        let ell2 = RigidBasis::ell2(&space).unwrap();
        Self {
            space,
            a: Arc::new(a),
            m,
            l2,
            ell2,
        }
    }

    pub fn a_plus_m(&self) -> CholeskyFactor<f64> {
        sparse_cholesky(&self.a.linear_combination(1.0, &self.m, 1.0).unwrap()).unwrap()
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `‖a − b‖ / ‖b‖`
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    norm(&diff(a, b)) / norm(b)
}

/// Deterministic pseudo-random vector in `[-1, 1)`.
pub fn probe(n: usize, seed: u64) -> Vec<f64> {
    rigid_neumann::krylov::random_vector(n, seed)
}

/// Moore–Penrose pseudoinverse by SVD, dropping singular values below `rtol · σ_max`.
pub fn svd_pinv_apply(a: &DMatrix<f64>, b: &[f64], rtol: f64) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let bv = DVector::from_column_slice(b);
    let mut x = DVector::zeros(a.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rtol * smax {
            let c = u.column(k).dot(&bv) / s;
            x += vt.row(k).transpose() * c;
        }
    }
    x.iter().copied().collect()
}

pub fn h1_rel(e: &Elastic, a: &[f64], b: &[f64]) -> f64 {
    let d = Field::new(e.space.clone(), diff(a, b));
    h1_norm(&d) / h1_norm(&Field::new(e.space.clone(), b.to_vec()))
}

pub struct Solutions {
    pub lagrange: Vec<f64>,
    pub multiplier: [f64; 6],
    pub singular: Vec<f64>,
    pub natural: Vec<f64>,
}

pub fn three_routes(e: &Elastic, b: &[f64]) -> Solutions {
    let apm = e.a_plus_m();
    let sys = build_lagrange(&e.a, &e.l2, b).unwrap();
    let lag = solve_lagrange(
        &sys,
        &precond_bm(&apm),
        None,
        &StoppingRule::relative(1e-13, 1000),
    );
    assert!(lag.report.converged);
    let pc = ProjectedInverse {
        factor: &apm,
        basis: &e.ell2,
    };
    let sing = cg_singular(
        &e.a,
        &e.l2,
        &e.ell2,
        RhsProjector::Pt,
        SolProjector::P,
        &pc,
        b,
        &StoppingRule::relative(1e-13, 5000),
    )
    .unwrap();
    assert!(sing.report.converged);
    let nat = solve_natural_norm(
        &e.a,
        &e.l2,
        &apm,
        b,
        None,
        &StoppingRule::relative(1e-13, 5000),
    )
    .unwrap();
    assert!(nat.converged);
    Solutions {
        lagrange: lag.u,
        multiplier: lag.multiplier,
        singular: sing.report.solution,
        natural: nat.solution,
    }
}

/// Elastic energy of a P1 field computed from per-cell affine fits.
pub fn p1_energy(mesh: &Mesh, u: &[f64], mu: f64, lambda: f64) -> f64 {
    let mut e = 0.0;
    for c in 0..mesh.num_cells() {
        let pts = mesh.cell_points(c);
        let verts = mesh.cells[c];
        let edges = Matrix3::from_fn(|i, k| pts[i + 1][k] - pts[0][k]);
        let inv = edges.try_inverse().unwrap();
        let mut g = Matrix3::zeros();
        for comp in 0..3 {
            let du = Vector3::from_fn(|i, _| u[3 * verts[i + 1] + comp] - u[3 * verts[0] + comp]);
            let row = inv * du;
            for k in 0..3 {
                g[(comp, k)] = row[k];
            }
        }
        let eps = (g + g.transpose()) * 0.5;
        let vol = edges.determinant().abs() / 6.0;
        e += vol * (2.0 * mu * eps.norm_squared() + lambda * eps.trace().powi(2));
    }
    e
}
