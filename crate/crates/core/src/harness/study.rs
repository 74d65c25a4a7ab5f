//! Convergence studies over mesh families.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::case::{example_mesh_params, mixed_load, ManufacturedCase, PoissonCase};
use super::table::{ConvergenceTable, Row};
use crate::fem::{
    assemble_form, assemble_load, error_norms, interpolate, Family, Field, FormKind, FunctionSpace,
};
use crate::formulations::{
    assemble_mixed, build_lagrange, build_mixed_double, build_mixed_single, eigen_bounds,
    lagrange_eigen_problem, pinpoint, precond_b1, precond_be, precond_bm, precond_mixed,
    solve_lagrange, solve_natural_norm, EigenPrecond, FormulationError, LagrangePrecond, Lambda,
    PinStrategy, SpectralBounds, INNER_RTOL,
};
use crate::krylov::{
    cg, cg_singular, minres, random_vector, LinearOperator, ProjectedInverse, PseudoInverse,
    RhsProjector, SingularError, SolProjector, SolveReport, StoppingRule,
};
use crate::linalg::{sparse_cholesky, CsrMatrix, LinalgError};
use crate::mesh::{Grading, Mesh, MeshError, MeshParams};
use crate::rigid::{RigidBasis, RigidError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    Uniform,
    /// Power-law grading with exponent 2: toward an edge for the elastic
    /// body, toward the origin for the Poisson cube.
    Graded,
}

/// Preconditioner of the singular CG solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SingularPrecond {
    /// `P_Z (A + M)⁻¹ P_Z`
    Pzam,
    /// Inner projected solve with `A` itself.
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MixedKind {
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Formulation {
    PoissonPinpoint,
    ElasticityPinpoint {
        strategy: PinStrategy,
    },
    Lagrange {
        precond: LagrangePrecond,
    },
    CgSingular {
        rhs: RhsProjector,
        sol: SolProjector,
        precond: SingularPrecond,
    },
    NaturalNorm,
    Mixed {
        formulation: MixedKind,
        lambda: Lambda,
    },
}

impl Formulation {
    pub fn default_stop(&self) -> StoppingRule {
        match self {
            Formulation::PoissonPinpoint
            | Formulation::ElasticityPinpoint { .. }
            | Formulation::Lagrange { .. } => StoppingRule::relative(1e-11, 5000),
            Formulation::CgSingular { .. } | Formulation::NaturalNorm => {
                StoppingRule::relative(1e-10, 5000)
            }
            Formulation::Mixed { .. } => StoppingRule::absolute(1e-8, 5000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub formulation: Formulation,
    pub mesh: MeshFamily,
    /// Divisions per axis on level 0; each level doubles them.
    pub base_divisions: usize,
    pub levels: usize,
    pub stop: StoppingRule,
    pub seed: u64,
    /// Rigid-motion coefficients added to the body force.
    pub perturbation: Option<[f64; 6]>,
}

impl ExperimentConfig {
    pub fn new(
        formulation: Formulation,
        mesh: MeshFamily,
        base_divisions: usize,
        levels: usize,
    ) -> Self {
        Self {
            formulation,
            mesh,
            base_divisions,
            levels,
            stop: formulation.default_stop(),
            seed: 0,
            perturbation: None,
        }
    }

    pub fn mesh_params(&self, level: usize) -> MeshParams {
        let n = self.base_divisions << level;
        match self.formulation {
            Formulation::PoissonPinpoint => {
                let mut p = MeshParams::unit_cube(n);
                if self.mesh == MeshFamily::Graded {
                    p.grading = Grading::TowardVertex {
                        corner: 0,
                        beta: 2.0,
                    };
                }
                p
            }
            _ => example_mesh_params(n, elastic_grading(self.mesh)),
        }
    }
}

pub fn elastic_grading(family: MeshFamily) -> Grading {
    match family {
        MeshFamily::Uniform => Grading::Uniform,
        MeshFamily::Graded => Grading::TowardEdge {
            axis: 2,
            corner: 0,
            beta: 2.0,
        },
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Singular(#[from] SingularError),
    #[error(transparent)]
    Rigid(#[from] RigidError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Assembly(#[from] crate::fem::AssemblyError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Outcome of one level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub row: Row,
    pub solution: Field,
    /// Lagrange multiplier, when the formulation has one.
    pub multiplier: Option<[f64; 6]>,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub table: ConvergenceTable,
    pub levels: Vec<LevelResult>,
}

impl StudyResult {
    pub fn last_solution(&self) -> Option<&Field> {
        self.levels.last().map(|l| &l.solution)
    }
}

pub fn run_study(config: &ExperimentConfig) -> Result<StudyResult, StudyError> {
    if config.levels == 0 || config.base_divisions == 0 {
        return Err(StudyError::Config(
            "levels and base divisions must be positive".into(),
        ));
    }
    let meshes = (0..config.levels)
        .map(|l| config.mesh_params(l).build().map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    let case = match config.formulation {
        Formulation::PoissonPinpoint | Formulation::Mixed { .. } => None,
        _ => Some(ManufacturedCase::example(
            meshes.last().unwrap(),
            config.perturbation,
        )?),
    };
    let mut table = ConvergenceTable::default();
    let mut levels = Vec::new();
    for (level, mesh) in meshes.iter().enumerate() {
        let start = Instant::now();
        let mut result = match config.formulation {
            Formulation::PoissonPinpoint => poisson_level(config, mesh)?,
            Formulation::Mixed {
                formulation,
                lambda,
            } => mixed_level(config, mesh, formulation, lambda)?,
            _ => elastic_level(config, mesh, case.as_ref().unwrap())?,
        };
        result.row.level = level;
        result.row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        table.push(result.row.clone());
        result.row = table.rows.last().unwrap().clone();
        levels.push(result);
    }
    Ok(StudyResult { table, levels })
}

fn row(ndof: usize, h1_error: Option<f64>, report: &SolveReport<f64>, orth: (f64, f64)) -> Row {
    Row {
        level: 0,
        ndof,
        h1_error,
        rate: None,
        iters: report.iterations,
        orth_l2_norm: orth.0,
        orth_ell2: orth.1,
        wall_ms: 0.0,
        converged: report.converged,
    }
}

fn plus(a: &CsrMatrix<f64>, b: &CsrMatrix<f64>) -> Result<CsrMatrix<f64>, LinalgError> {
    a.linear_combination(1.0, b, 1.0)
}

fn poisson_level(config: &ExperimentConfig, mesh: &Arc<Mesh>) -> Result<LevelResult, StudyError> {
    let case = PoissonCase;
    let space = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Scalar));
    let a = assemble_form(FormKind::ScalarStiffness, &space, &space)?;
    let b = assemble_load(&space, &|x| [case.source(x), 0.0, 0.0], None);
    let exact = interpolate(&space, &|x| [case.exact(x), 0.0, 0.0]).values;
    let pinned = pinpoint(&a, &b, &space, PinStrategy::PoissonCorner, &exact)?;
    let report = solve_pinned(config, &pinned.a, &pinned.b)?;
    let field = Field::new(space.clone(), report.solution.clone());
    let err = error_norms(&field, &|x| [case.exact(x), 0.0, 0.0], &|x| {
        [case.exact_grad(x), [0.0; 3], [0.0; 3]]
    });
    let r = row(
        space.dof_count(),
        Some(err.h1_error),
        &report,
        (f64::NAN, f64::NAN),
    );
    Ok(LevelResult {
        row: Row {
            orth_l2_norm: 0.0,
            orth_ell2: 0.0,
            ..r
        },
        solution: field,
        multiplier: None,
        residual_history: report.residual_history,
    })
}

/// CG on a pinned SPD system, preconditioned by its own factorization and
/// started from a random vector.
fn solve_pinned(
    config: &ExperimentConfig,
    a: &CsrMatrix<f64>,
    b: &[f64],
) -> Result<SolveReport<f64>, StudyError> {
    let factor = sparse_cholesky(a)?;
    let x0 = random_vector(b.len(), config.seed);
    Ok(cg(a, &factor, b, &x0, &config.stop))
}

fn elastic_level(
    config: &ExperimentConfig,
    mesh: &Arc<Mesh>,
    case: &ManufacturedCase,
) -> Result<LevelResult, StudyError> {
    let space = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Vector));
    let a = Arc::new(assemble_form(
        FormKind::ElasticStiffness {
            mu: case.mu,
            lambda: case.lambda,
        },
        &space,
        &space,
    )?);
    let m = assemble_form(FormKind::VectorMass, &space, &space)?;
    let l2 = RigidBasis::l2(&space, &m)?;
    let ell2 = RigidBasis::ell2(&space)?;
    let b = case.load(&space);
    let mut multiplier = None;
    let report = match config.formulation {
        Formulation::ElasticityPinpoint { strategy } => {
            let exact = case.interpolant(&space);
            let pinned = pinpoint(&a, &b, &space, strategy, &exact)?;
            solve_pinned(config, &pinned.a, &pinned.b)?
        }
        Formulation::Lagrange { precond } => {
            let system = build_lagrange(&a, &l2, &b)?;
            let sol = match precond {
                LagrangePrecond::B1 => {
                    let h = sparse_cholesky(&assemble_form(FormKind::H1Inner, &space, &space)?)?;
                    let pc = precond_b1(&h);
                    let sol = solve_lagrange(&system, &pc, None, &config.stop);
                    sol
                }
                LagrangePrecond::Bm => {
                    let apm = sparse_cholesky(&plus(&a, &m)?)?;
                    let pc = precond_bm(&apm);
                    let sol = solve_lagrange(&system, &pc, None, &config.stop);
                    sol
                }
                LagrangePrecond::Be => {
                    let apm = sparse_cholesky(&plus(&a, &m)?)?;
                    let pc = precond_be(&a, &l2, &apm);
                    let sol = solve_lagrange(&system, &pc, None, &config.stop);
                    sol
                }
            };
            multiplier = Some(sol.multiplier);
            SolveReport {
                solution: sol.u,
                ..sol.report
            }
        }
        Formulation::CgSingular { rhs, sol, precond } => {
            let apm = sparse_cholesky(&plus(&a, &m)?)?;
            let op: Box<dyn LinearOperator<f64>> = match precond {
                SingularPrecond::Pzam => Box::new(ProjectedInverse {
                    factor: &apm,
                    basis: &ell2,
                }),
                SingularPrecond::Pseudo => Box::new(PseudoInverse {
                    a: &a,
                    basis: &ell2,
                    inner: &apm,
                    stop: StoppingRule::relative(INNER_RTOL, 5000),
                }),
            };
            cg_singular(&a, &l2, &ell2, rhs, sol, op.as_ref(), &b, &config.stop)?.report
        }
        Formulation::NaturalNorm => {
            let apm = sparse_cholesky(&plus(&a, &m)?)?;
            solve_natural_norm(&a, &l2, &apm, &b, None, &config.stop)?
        }
        Formulation::PoissonPinpoint | Formulation::Mixed { .. } => {
            unreachable!("not an elastic P1 study")
        }
    };
    let field = Field::new(space.clone(), report.solution.clone());
    let err = error_norms(&field, &|x| case.exact(x), &|x| case.exact_grad(x));
    let orth = (
        l2.orthogonality_error(&field.values),
        ell2.orthogonality_error(&field.values),
    );
    Ok(LevelResult {
        row: row(space.dof_count(), Some(err.h1_error), &report, orth),
        solution: field,
        multiplier,
        residual_history: report.residual_history,
    })
}

fn mixed_level(
    config: &ExperimentConfig,
    mesh: &Arc<Mesh>,
    kind: MixedKind,
    lambda: Lambda,
) -> Result<LevelResult, StudyError> {
    let (report, u_space, nu) = solve_mixed(mesh, kind, lambda, &config.stop)?;
    let u = report.solution[..nu].to_vec();
    let field = Field::new(u_space.clone(), u);
    let m = assemble_form(FormKind::VectorMass, &u_space, &u_space)?;
    let l2 = RigidBasis::l2(&u_space, &m)?;
    let ell2 = RigidBasis::ell2(&u_space)?;
    let orth = (
        l2.orthogonality_error(&field.values),
        ell2.orthogonality_error(&field.values),
    );
    let multiplier = match kind {
        MixedKind::Double => Some(std::array::from_fn(|k| {
            report.solution[report.solution.len() - 6 + k]
        })),
        MixedKind::Single => None,
    };
    Ok(LevelResult {
        row: row(
            u_space.dof_count() + mesh.num_vertices(),
            None,
            &report,
            orth,
        ),
        solution: field,
        multiplier,
        residual_history: report.residual_history,
    })
}

/// Taylor–Hood solve with `μ = 1`, `f = u*`, `h = 0`. Returns the full block
/// solution, the displacement space and its dof count.
pub fn solve_mixed(
    mesh: &Arc<Mesh>,
    kind: MixedKind,
    lambda: Lambda,
    stop: &StoppingRule,
) -> Result<(SolveReport<f64>, Arc<FunctionSpace>, usize), StudyError> {
    let u_space = Arc::new(FunctionSpace::new(mesh.clone(), Family::P2Vector));
    let p_space = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Scalar));
    let blocks = assemble_mixed(&u_space, &p_space, 1.0)?;
    let basis = RigidBasis::l2(&u_space, &blocks.m)?;
    let b = mixed_load(&u_space);
    let apm = sparse_cholesky(&plus(&blocks.a, &blocks.m)?)?;
    let c = sparse_cholesky(&blocks.c)?;
    let (system, precond) = match kind {
        MixedKind::Double => (
            build_mixed_double(&blocks, &basis, lambda, &b)?,
            precond_mixed(&apm, &c, true),
        ),
        MixedKind::Single => (
            build_mixed_single(&blocks, &basis, lambda, &b)?,
            precond_mixed(&apm, &c, false),
        ),
    };
    let x0 = vec![0.0; system.dim()];
    let report = minres(&system, &precond, &system.rhs, &x0, stop);
    Ok((report, u_space.clone(), u_space.dof_count()))
}

/// Spectral bounds of the preconditioned Lagrange system on the example body
/// with `n` divisions per axis for each entry of `divisions`.
pub fn run_eigenbounds(
    which: EigenPrecond,
    divisions: &[usize],
) -> Result<Vec<SpectralBounds>, StudyError> {
    divisions
        .iter()
        .map(|&n| {
            let mesh = Arc::new(example_mesh_params(n, Grading::Uniform).build()?);
            let space = FunctionSpace::new(mesh, Family::P1Vector);
            let mu = super::case::EXAMPLE_MU;
            let lambda = super::case::EXAMPLE_LAMBDA;
            let a = Arc::new(assemble_form(
                FormKind::ElasticStiffness { mu, lambda },
                &space,
                &space,
            )?);
            let m = assemble_form(FormKind::VectorMass, &space, &space)?;
            let basis = RigidBasis::l2(&space, &m)?;
            let (system, n_mat) = lagrange_eigen_problem(&a, &m, &basis, which)?;
            Ok(eigen_bounds(&system, &n_mat)?)
        })
        .collect()
}
