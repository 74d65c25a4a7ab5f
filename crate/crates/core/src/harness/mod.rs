//! Manufactured cases, convergence studies, table output and the CLI.

mod case;
pub mod cli;
mod study;
mod table;

pub use case::{
    example_mesh_params, example_placement, mixed_load, rigid_coefficients, u_star, u_star_grad,
    ManufacturedCase, PoissonCase, EXAMPLE_BOUNDS, EXAMPLE_LAMBDA, EXAMPLE_MU,
};
pub use study::{
    elastic_grading, run_eigenbounds, run_study, solve_mixed, ExperimentConfig, Formulation,
    LevelResult, MeshFamily, MixedKind, SingularPrecond, StudyError, StudyResult,
};
pub use table::{
    emit, rate, ConvergenceTable, EmitError, Format, JsonReport, Row, ARTIFACT_VERSION, CSV_HEADER,
};

use std::path::Path;

use crate::fem::Field;
use crate::mesh::{write_vtk, MeshError, Point, VtkField};

/// Writes the vertex values of a vector field as legacy VTK point data.
pub fn export_vtk(field: &Field, name: &str, path: &Path) -> Result<(), MeshError> {
    let mesh = field.space.mesh();
    let values: Vec<Point> = field
        .node_vectors()
        .into_iter()
        .take(mesh.num_vertices())
        .collect();
    write_vtk(
        path,
        mesh,
        &[VtkField {
            name,
            values: &values,
        }],
    )
}
