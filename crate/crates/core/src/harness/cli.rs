//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{
    emit, export_vtk, run_eigenbounds, run_study, ExperimentConfig, Format, Formulation, MeshFamily,
};
use super::{MixedKind, SingularPrecond};
use crate::formulations::{EigenPrecond, LagrangePrecond, Lambda, PinStrategy, SpectralBounds};
use crate::krylov::{RhsProjector, SolProjector, StoppingRule};

#[derive(Debug, Parser)]
#[command(
    name = "rigid-neumann",
    version,
    about = "Pure-Neumann elasticity solvers and convergence studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poisson problem with the solution pinned at one corner.
    PoissonPinpoint(Common),
    /// Elasticity with the displacement prescribed at a few points.
    ElasticityPinpoint {
        #[arg(long, value_enum)]
        strategy: CliPin,
        #[command(flatten)]
        common: Common,
    },
    /// Lagrange multiplier saddle system solved with MinRes.
    Lagrange {
        #[arg(long, value_enum, default_value = "bm")]
        precond: CliLagrange,
        #[command(flatten)]
        common: Common,
    },
    /// CG on the singular system with projected data and solution.
    CgSingular {
        #[arg(long, value_enum, default_value = "pt")]
        rhs_proj: CliRhs,
        #[arg(long, value_enum, default_value = "p")]
        sol_proj: CliSol,
        #[arg(long, value_enum, default_value = "pzam")]
        precond: SingularPrecond,
        #[command(flatten)]
        common: Common,
    },
    /// CG on the positive definite system `A + W Wᵀ`.
    NaturalNorm(Common),
    /// Taylor–Hood mixed formulation solved with MinRes.
    Mixed {
        #[arg(long, value_enum, default_value = "double")]
        formulation: MixedKind,
        /// Second Lamé constant, a positive number or `inf`.
        #[arg(long, default_value = "1e4")]
        lam: Lambda,
        #[command(flatten)]
        common: Common,
    },
    /// Extreme eigenvalues of the preconditioned Lagrange system.
    Eigenbounds {
        #[arg(long, value_enum, default_value = "be")]
        precond: CliEigen,
        /// Number of meshes, starting from 2 divisions per axis.
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "uniform")]
    pub mesh: MeshFamily,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Divisions per axis on the coarsest level.
    #[arg(long, default_value_t = 4)]
    pub base: usize,
    /// Relative tolerance on the preconditioned residual.
    #[arg(long, conflicts_with = "atol")]
    pub rtol: Option<f64>,
    /// Absolute tolerance on the preconditioned residual.
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Six rigid-motion coefficients added to the body force.
    #[arg(long, value_delimiter = ',')]
    pub perturb: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write the finest solution as a legacy VTK file.
    #[arg(long)]
    pub vtk: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliPin {
    #[value(name = "3circ")]
    ThreeCirc,
    #[value(name = "1tri")]
    OneTri,
    #[value(name = "3tri")]
    ThreeTri,
    #[value(name = "3dot")]
    ThreeDot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliLagrange {
    B1,
    Be,
    Bm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliRhs {
    Pz,
    Pt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliSol {
    Pz,
    P,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliEigen {
    Be,
    Bm,
}

impl Common {
    fn config(&self, formulation: Formulation) -> Result<ExperimentConfig, String> {
        let mut cfg = ExperimentConfig::new(formulation, self.mesh, self.base, self.levels);
        cfg.stop = match (self.rtol, self.atol) {
            (Some(t), _) => StoppingRule::relative(t, self.max_iter),
            (None, Some(t)) => StoppingRule::absolute(t, self.max_iter),
            (None, None) => StoppingRule {
                max_iterations: self.max_iter,
                ..cfg.stop
            },
        };
        if !(cfg.stop.tolerance > 0.0) {
            return Err("tolerance must be positive".into());
        }
        cfg.seed = self.seed;
        cfg.perturbation = match &self.perturb {
            Some(p) if p.len() != 6 => {
                return Err(format!("--perturb needs 6 values, got {}", p.len()))
            }
            Some(p) => Some(std::array::from_fn(|k| p[k])),
            None => None,
        };
        Ok(cfg)
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some solves did not converge");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs one command; `Ok(true)` when every solve converged.
pub fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let (formulation, common) = match cli.command {
        Command::Eigenbounds {
            precond,
            levels,
            out,
            format,
        } => {
            let which = match precond {
                CliEigen::Be => EigenPrecond::Be,
                CliEigen::Bm => EigenPrecond::Bm,
            };
            let divisions: Vec<usize> = (0..levels).map(|l| 2 << l).collect();
            let bounds = run_eigenbounds(which, &divisions)?;
            write_bounds(&bounds, which, format, out.as_deref())?;
            return Ok(true);
        }
        Command::PoissonPinpoint(c) => (Formulation::PoissonPinpoint, c),
        Command::ElasticityPinpoint { strategy, common } => {
            let strategy = match strategy {
                CliPin::ThreeCirc => PinStrategy::ThreeCirc,
                CliPin::OneTri => PinStrategy::OneTri,
                CliPin::ThreeTri => PinStrategy::ThreeTri,
                CliPin::ThreeDot => PinStrategy::ThreeDot,
            };
            (Formulation::ElasticityPinpoint { strategy }, common)
        }
        Command::Lagrange { precond, common } => {
            let precond = match precond {
                CliLagrange::B1 => LagrangePrecond::B1,
                CliLagrange::Be => LagrangePrecond::Be,
                CliLagrange::Bm => LagrangePrecond::Bm,
            };
            (Formulation::Lagrange { precond }, common)
        }
        Command::CgSingular {
            rhs_proj,
            sol_proj,
            precond,
            common,
        } => {
            let rhs = match rhs_proj {
                CliRhs::Pz => RhsProjector::Pz,
                CliRhs::Pt => RhsProjector::Pt,
            };
            let sol = match sol_proj {
                CliSol::Pz => SolProjector::Pz,
                CliSol::P => SolProjector::P,
                CliSol::None => SolProjector::None,
            };
            (Formulation::CgSingular { rhs, sol, precond }, common)
        }
        Command::NaturalNorm(c) => (Formulation::NaturalNorm, c),
        Command::Mixed {
            formulation,
            lam,
            common,
        } => (
            Formulation::Mixed {
                formulation,
                lambda: lam,
            },
            common,
        ),
    };
    let config = common.config(formulation)?;
    let result = run_study(&config)?;
    emit(&result.table, &config, common.format, common.out.as_deref())?;
    if let (Some(path), Some(field)) = (&common.vtk, result.last_solution()) {
        export_vtk(field, "displacement", path)?;
    }
    Ok(result.table.all_converged())
}

fn write_bounds(
    bounds: &[SpectralBounds],
    which: EigenPrecond,
    format: Format,
    path: Option<&std::path::Path>,
) -> Result<(), Box<dyn std::error::Error>> {
    let text = match format {
        Format::Csv => {
            let mut s = String::from(
                "size,kappa,neg_min_plus_1,neg_max_plus_1,pos_min_minus_1,pos_max_minus_1\n",
            );
            for b in bounds {
                s += &format!(
                    "{},{:.6},{:.3e},{:.3e},{:.3e},{:.3e}\n",
                    b.size,
                    b.kappa,
                    b.neg_min + 1.0,
                    b.neg_max + 1.0,
                    b.pos_min - 1.0,
                    b.pos_max - 1.0
                );
            }
            s
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Out<'a> {
                version: &'a str,
                precond: EigenPrecond,
                bounds: &'a [SpectralBounds],
            }
            serde_json::to_string_pretty(&Out {
                version: super::ARTIFACT_VERSION,
                precond: which,
                bounds,
            })? + "\n"
        }
    };
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from([
            "rigid-neumann",
            "cg-singular",
            "--rhs-proj",
            "pz",
            "--sol-proj",
            "none",
            "--precond",
            "pseudo",
            "--mesh",
            "graded",
            "--levels",
            "2",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::CgSingular {
                rhs_proj: CliRhs::Pz,
                sol_proj: CliSol::None,
                ..
            }
        ));
        let cli = Cli::try_parse_from(["rigid-neumann", "mixed", "--lam", "inf", "--atol", "1e-8"])
            .unwrap();
        match cli.command {
            Command::Mixed { lam, common, .. } => {
                assert_eq!(lam, Lambda::Infinite);
                let cfg = common.config(Formulation::NaturalNorm).unwrap();
                assert_eq!(cfg.stop, StoppingRule::absolute(1e-8, 5000));
            }
            _ => panic!(),
        }
        let cli = Cli::try_parse_from([
            "rigid-neumann",
            "elasticity-pinpoint",
            "--strategy",
            "3circ",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::ElasticityPinpoint {
                strategy: CliPin::ThreeCirc,
                ..
            }
        ));
        assert!(Cli::try_parse_from([
            "rigid-neumann",
            "lagrange",
            "--rtol",
            "1e-8",
            "--atol",
            "1e-8"
        ])
        .is_err());
    }

    #[test]
    fn perturbation_needs_six_values() {
        let cli =
            Cli::try_parse_from(["rigid-neumann", "natural-norm", "--perturb", "1,2,3"]).unwrap();
        let Command::NaturalNorm(c) = cli.command else {
            panic!()
        };
        assert!(c.config(Formulation::NaturalNorm).is_err());
        let cli =
            Cli::try_parse_from(["rigid-neumann", "natural-norm", "--perturb", "1,2,3,4,5,6"])
                .unwrap();
        let Command::NaturalNorm(c) = cli.command else {
            panic!()
        };
        let cfg = c.config(Formulation::NaturalNorm).unwrap();
        assert_eq!(cfg.perturbation, Some([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
    }
}
