//! Manufactured solutions.

use std::f64::consts::PI;

use crate::fem::{assemble_form, interpolate, FormKind, FunctionSpace};
use crate::mesh::{Grading, Mesh, MeshParams, Placement, Point};
use crate::rigid::{RigidBasis, RigidError, RigidMotion};
use std::sync::Arc;

const LOAD_DEGREE: usize = 8;

pub const EXAMPLE_MU: f64 = 384.0;
pub const EXAMPLE_LAMBDA: f64 = 577.0;
pub const EXAMPLE_BOUNDS: [[f64; 2]; 3] = [[-0.25, 0.25], [-0.5, 0.5], [-0.125, 0.125]];

pub fn example_placement() -> Placement {
    Placement {
        angles: [PI / 2.0, PI / 4.0, PI / 5.0],
        translation: [0.1, 0.2, 0.3],
    }
}

/// The rotated and translated box with `n` divisions per axis.
pub fn example_mesh_params(n: usize, grading: Grading) -> MeshParams {
    MeshParams {
        bounds: EXAMPLE_BOUNDS,
        divisions: [n; 3],
        grading,
        placement: Some(example_placement()),
    }
}

/// `u* = ¼ (sin(πx/4), z³, −y)`
pub fn u_star(x: &Point) -> Point {
    [
        0.25 * (PI * x[0] / 4.0).sin(),
        0.25 * x[2].powi(3),
        -0.25 * x[1],
    ]
}

/// `grad[c][k] = ∂u*_c/∂x_k`
pub fn u_star_grad(x: &Point) -> [[f64; 3]; 3] {
    [
        [PI / 16.0 * (PI * x[0] / 4.0).cos(), 0.0, 0.0],
        [0.0, 0.0, 0.75 * x[2] * x[2]],
        [0.0, -0.25, 0.0],
    ]
}

/// Elasticity data built from `u*`, with its `L2` rigid component removed.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub mu: f64,
    pub lambda: f64,
    /// `L2`-orthonormal rigid motions of the domain.
    pub motions: [RigidMotion; 6],
    /// `c_k = (u*, z_k)`
    pub coefficients: [f64; 6],
    /// Rigid motions added to the body force, `Σ p_k z_k`.
    pub perturbation: [f64; 6],
}

impl ManufacturedCase {
    /// `reference` fixes the rigid motions and the coefficients `c_k`; any
    /// mesh of the body works, the study passes its finest one.
    pub fn new(
        reference: &Arc<Mesh>,
        mu: f64,
        lambda: f64,
        perturbation: Option<[f64; 6]>,
    ) -> Result<Self, RigidError> {
        let space = Arc::new(FunctionSpace::new(
            reference.clone(),
            crate::fem::Family::P1Vector,
        ));
        let m = assemble_form(FormKind::VectorMass, &space, &space)
            .map_err(|_| RigidError::ScalarSpace)?;
        let basis = RigidBasis::l2(&space, &m)?;
        let motions = basis.motions;
        let coefficients = rigid_coefficients(reference, &motions, &u_star);
        Ok(Self {
            mu,
            lambda,
            motions,
            coefficients,
            perturbation: perturbation.unwrap_or([0.0; 6]),
        })
    }

    pub fn example(
        reference: &Arc<Mesh>,
        perturbation: Option<[f64; 6]>,
    ) -> Result<Self, RigidError> {
        Self::new(reference, EXAMPLE_MU, EXAMPLE_LAMBDA, perturbation)
    }

    fn rigid(&self, c: &[f64; 6], x: &Point) -> Point {
        let mut out = [0.0; 3];
        for (z, &ck) in self.motions.iter().zip(c) {
            let v = z.eval(x);
            for k in 0..3 {
                out[k] += ck * v[k];
            }
        }
        out
    }

    /// `u = u* − Σ c_k z_k`
    pub fn exact(&self, x: &Point) -> Point {
        let u = u_star(x);
        let r = self.rigid(&self.coefficients, x);
        [0, 1, 2].map(|k| u[k] - r[k])
    }

    pub fn exact_grad(&self, x: &Point) -> [[f64; 3]; 3] {
        let mut g = u_star_grad(x);
        for (z, &ck) in self.motions.iter().zip(&self.coefficients) {
            let gz = z.gradient();
            for a in 0..3 {
                for b in 0..3 {
                    g[a][b] -= ck * gz[a][b];
                }
            }
        }
        g
    }

    /// `σ(u*)`, which equals `σ(u)`.
    pub fn stress(&self, x: &Point) -> [[f64; 3]; 3] {
        let g = u_star_grad(x);
        let div = g[0][0] + g[1][1] + g[2][2];
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                self.mu * (g[a][b] + g[b][a]) + if a == b { self.lambda * div } else { 0.0 }
            })
        })
    }

    /// `−∇·σ(u)` without the perturbation.
    pub fn body_force_compatible(&self, x: &Point) -> Point {
        let s = (PI * x[0] / 4.0).sin();
        [
            (2.0 * self.mu + self.lambda) * PI * PI / 64.0 * s,
            -1.5 * self.mu * x[2],
            0.0,
        ]
    }

    /// `f = −∇·σ(u) + Σ p_k z_k`
    pub fn body_force(&self, x: &Point) -> Point {
        let f = self.body_force_compatible(x);
        let r = self.rigid(&self.perturbation, x);
        [0, 1, 2].map(|k| f[k] + r[k])
    }

    /// `h = σ(u) n`
    pub fn traction(&self, x: &Point, n: &Point) -> Point {
        let s = self.stress(x);
        std::array::from_fn(|a| (0..3).map(|b| s[a][b] * n[b]).sum())
    }

    /// Load vector with degree-8 rules, so quadrature leaves `Yᵀb` at round-off level.
    pub fn load(&self, space: &FunctionSpace) -> Vec<f64> {
        crate::fem::assemble_load_with_degree(
            space,
            &|x| self.body_force(x),
            Some(&|x, n| self.traction(x, n)),
            LOAD_DEGREE,
        )
    }

    pub fn interpolant(&self, space: &Arc<FunctionSpace>) -> Vec<f64> {
        interpolate(space, &|x| self.exact(x)).values
    }
}

/// `(g, z_k)` by degree-6 quadrature.
pub fn rigid_coefficients(
    mesh: &Mesh,
    motions: &[RigidMotion; 6],
    g: &dyn Fn(&Point) -> Point,
) -> [f64; 6] {
    let rule = crate::fem::quadrature::tet_rule(6);
    let mut c = [0.0; 6];
    for cell in 0..mesh.num_cells() {
        let geo = crate::fem::CellGeometry::new(mesh.cell_points(cell));
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map(l);
            let gx = g(&x);
            let wq = w * 6.0 * geo.volume;
            for (ck, z) in c.iter_mut().zip(motions) {
                let zx = z.eval(&x);
                *ck += wq * (gx[0] * zx[0] + gx[1] * zx[1] + gx[2] * zx[2]);
            }
        }
    }
    c
}

/// Neumann Poisson problem on the unit cube with `u = cos πx cos πy cos πz`,
/// `f = 3π² u` and zero flux.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonCase;

impl PoissonCase {
    pub fn exact(&self, x: &Point) -> f64 {
        (PI * x[0]).cos() * (PI * x[1]).cos() * (PI * x[2]).cos()
    }

    pub fn exact_grad(&self, x: &Point) -> [f64; 3] {
        let (c, s) = (x.map(|t| (PI * t).cos()), x.map(|t| (PI * t).sin()));
        [
            -PI * s[0] * c[1] * c[2],
            -PI * c[0] * s[1] * c[2],
            -PI * c[0] * c[1] * s[2],
        ]
    }

    pub fn source(&self, x: &Point) -> f64 {
        3.0 * PI * PI * self.exact(x)
    }
}

/// Data of the mixed experiments: `μ = 1`, `f = u*`, `h = 0`.
pub fn mixed_load(space: &FunctionSpace) -> Vec<f64> {
    crate::fem::assemble_load(space, &u_star, None)
}
