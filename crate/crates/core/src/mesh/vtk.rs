//! Legacy ASCII VTK writer for unstructured tetrahedral grids.

use std::io::Write;
use std::path::Path;

use super::{Mesh, MeshError, Point};

const VTK_TETRA: u8 = 10;

/// Named per-vertex vector data.
pub struct VtkField<'a> {
    pub name: &'a str,
    pub values: &'a [Point],
}

pub fn write_vtk(path: &Path, mesh: &Mesh, fields: &[VtkField<'_>]) -> Result<(), MeshError> {
    let io = |source| MeshError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write_to(&mut w, mesh, fields).map_err(io)?;
    w.flush().map_err(io)
}

pub(crate) fn write_to<W: Write>(
    w: &mut W,
    mesh: &Mesh,
    fields: &[VtkField<'_>],
) -> std::io::Result<()> {
    let nv = mesh.num_vertices();
    let nc = mesh.num_cells();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "rigid-neumann output")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in &mesh.vertices {
        writeln!(w, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    writeln!(w, "CELLS {nc} {}", 5 * nc)?;
    for c in &mesh.cells {
        writeln!(w, "4 {} {} {} {}", c[0], c[1], c[2], c[3])?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "{VTK_TETRA}")?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {nv}")?;
    }
    for f in fields {
        if f.values.len() != nv {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!(
                    "field {} has {} values for {nv} points",
                    f.name,
                    f.values.len()
                ),
            ));
        }
        writeln!(
            w,
            "VECTORS {} double",
            f.name.replace(char::is_whitespace, "_")
        )?;
        for v in f.values {
            writeln!(w, "{:e} {:e} {:e}", v[0], v[1], v[2])?;
        }
    }
    Ok(())
}
