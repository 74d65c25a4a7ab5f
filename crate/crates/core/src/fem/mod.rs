//! Lagrange finite elements on tetrahedra.

mod assembly;
mod field;
pub mod quadrature;
mod space;

pub use assembly::{
    assemble_form, assemble_load, assemble_load_with_degree, AssemblyError, FormKind,
};
pub use field::{error_norms, error_norms_with_degree, h1_norm, interpolate, ErrorNorms, Field};
pub use space::{basis_gradients, basis_values, CellGeometry, Family, FunctionSpace, LOCAL_EDGES};
