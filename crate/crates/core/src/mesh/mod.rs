//! Structured tetrahedral meshes of boxes.

use std::collections::HashMap;

mod vtk;

pub use vtk::{write_vtk, VtkField};

pub type Point = [f64; 3];

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("divisions must be positive, got {0:?}")]
    ZeroDivisions([usize; 3]),
    #[error("degenerate interval on axis {axis}: [{lo}, {hi}]")]
    DegenerateInterval { axis: usize, lo: f64, hi: f64 },
    #[error("grading exponent must be >= 1 and finite, got {0}")]
    InvalidGrading(f64),
    #[error("grading attractor is invalid: {0}")]
    InvalidAttractor(&'static str),
    #[error("requested divisions overflow")]
    Overflow,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Where a structured mesh is refined.
///
/// Box corners are numbered by bits: bit `a` set means the upper end of axis
/// `a`. `TowardEdge` grades the two axes other than `axis` toward the box edge
/// parallel to `axis` through `corner`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Grading {
    Uniform,
    TowardVertex { corner: u8, beta: f64 },
    TowardEdge { axis: usize, corner: u8, beta: f64 },
}

impl Grading {
    fn beta(&self) -> f64 {
        match *self {
            Grading::Uniform => 1.0,
            Grading::TowardVertex { beta, .. } | Grading::TowardEdge { beta, .. } => beta,
        }
    }

    /// Per axis: `None` for a uniform axis, else whether the attractor sits at the upper end.
    fn axis_attractors(&self) -> [Option<bool>; 3] {
        match *self {
            Grading::Uniform => [None; 3],
            Grading::TowardVertex { corner, .. } => [0, 1, 2].map(|a| Some(corner >> a & 1 == 1)),
            Grading::TowardEdge { axis, corner, .. } => [0, 1, 2].map(|a| {
                if a == axis {
                    None
                } else {
                    Some(corner >> a & 1 == 1)
                }
            }),
        }
    }
}

/// Rigid placement applied after generation: `x -> Rz(θz) Ry(θy) Rx(θx) x + t`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Placement {
    pub angles: [f64; 3],
    pub translation: [f64; 3],
}

impl Placement {
    pub fn rotation(&self) -> [[f64; 3]; 3] {
        rotation_zyx(self.angles)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshParams {
    pub bounds: [[f64; 2]; 3],
    pub divisions: [usize; 3],
    pub grading: Grading,
    pub placement: Option<Placement>,
}

impl MeshParams {
    pub fn unit_cube(n: usize) -> Self {
        Self {
            bounds: [[0.0, 1.0]; 3],
            divisions: [n; 3],
            grading: Grading::Uniform,
            placement: None,
        }
    }

    pub fn build(&self) -> Result<Mesh, MeshError> {
        let mesh = build_box_mesh(self.bounds, self.divisions, self.grading)?;
        Ok(match &self.placement {
            Some(p) => transform_mesh(&mesh, p.angles, p.translation),
            None => mesh,
        })
    }

    /// Same family with every division doubled.
    pub fn refined(&self) -> Result<Self, MeshError> {
        let mut divisions = self.divisions;
        for d in divisions.iter_mut() {
            *d = d.checked_mul(2).ok_or(MeshError::Overflow)?;
        }
        // vertex count must stay addressable
        divisions
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d + 1))
            .and_then(|v| v.checked_mul(6))
            .ok_or(MeshError::Overflow)?;
        Ok(Self {
            divisions,
            ..self.clone()
        })
    }
}

/// Regenerates the structured mesh of `params` with all divisions doubled.
pub fn refine(params: &MeshParams) -> Result<Mesh, MeshError> {
    params.refined()?.build()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 3],
    pub normal: Point,
    pub cell: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 4]>,
    pub boundary_facets: Vec<BoundaryFacet>,
    pub grading: Grading,
    /// Vertex index of each box corner, numbered by bits as in [`Grading`].
    pub corners: [usize; 8],
    interior_facets: usize,
}

// Kuhn subdivision: one tetrahedron per axis permutation, all sharing the
// cube diagonal from local corner 0 to local corner 7.
const KUHN_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

pub fn build_box_mesh(
    bounds: [[f64; 2]; 3],
    divisions: [usize; 3],
    grading: Grading,
) -> Result<Mesh, MeshError> {
    if divisions.iter().any(|&d| d == 0) {
        return Err(MeshError::ZeroDivisions(divisions));
    }
    for (axis, &[lo, hi]) in bounds.iter().enumerate() {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(MeshError::DegenerateInterval { axis, lo, hi });
        }
    }
    let beta = grading.beta();
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(MeshError::InvalidGrading(beta));
    }
    match grading {
        Grading::TowardVertex { corner, .. } if corner > 7 => {
            return Err(MeshError::InvalidAttractor("corner index must be < 8"))
        }
        Grading::TowardEdge { axis, corner, .. } if axis > 2 || corner > 7 => {
            return Err(MeshError::InvalidAttractor(
                "edge axis must be < 3 and corner < 8",
            ))
        }
        _ => {}
    }
    let attractors = grading.axis_attractors();
    let lines: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let [lo, hi] = bounds[a];
            let n = divisions[a];
            (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let s = match attractors[a] {
                        None => t,
                        Some(false) => t.powf(beta),
                        Some(true) => 1.0 - (1.0 - t).powf(beta),
                    };
                    // keep end points exact
                    if i == 0 {
                        lo
                    } else if i == n {
                        hi
                    } else {
                        lo + (hi - lo) * s
                    }
                })
                .collect()
        })
        .collect();
    let [nx, ny, nz] = divisions;
    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([lines[0][i], lines[1][j], lines[2][k]]);
            }
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for perm in KUHN_PERMS {
                    let mut idx = [i, j, k];
                    let mut tet = [vid(i, j, k); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        idx[axis] += 1;
                        tet[step + 1] = vid(idx[0], idx[1], idx[2]);
                    }
                    if signed_volume(&vertices, &tet) < 0.0 {
                        tet.swap(2, 3);
                    }
                    cells.push(tet);
                }
            }
        }
    }
    let mut corners = [0usize; 8];
    for (c, slot) in corners.iter_mut().enumerate() {
        let pick = |a: usize, n: usize| if c >> a & 1 == 1 { n } else { 0 };
        *slot = vid(pick(0, nx), pick(1, ny), pick(2, nz));
    }
    let mut mesh = Mesh {
        vertices,
        cells,
        boundary_facets: Vec::new(),
        grading,
        corners,
        interior_facets: 0,
    };
    mesh.compute_facets();
    Ok(mesh)
}

/// Maps every vertex `p` to `Rz(θz) Ry(θy) Rx(θx) p + t` (fixed axes, x first).
pub fn transform_mesh(mesh: &Mesh, angles: [f64; 3], translation: [f64; 3]) -> Mesh {
    let r = rotation_zyx(angles);
    let mut out = mesh.clone();
    for p in out.vertices.iter_mut() {
        let q = mat_vec(&r, p);
        *p = [
            q[0] + translation[0],
            q[1] + translation[1],
            q[2] + translation[2],
        ];
    }
    for f in out.boundary_facets.iter_mut() {
        f.normal = mat_vec(&r, &f.normal);
    }
    out
}

pub fn rotation_zyx([ax, ay, az]: [f64; 3]) -> [[f64; 3]; 3] {
    let (sx, cx) = ax.sin_cos();
    let (sy, cy) = ay.sin_cos();
    let (sz, cz) = az.sin_cos();
    let rx = [[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]];
    let ry = [[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]];
    let rz = [[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]];
    mat_mul(&rz, &mat_mul(&ry, &rx))
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mat_vec(a: &[[f64; 3]; 3], x: &Point) -> Point {
    [0, 1, 2].map(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot3(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn signed_volume(vertices: &[Point], tet: &[usize; 4]) -> f64 {
    let p0 = vertices[tet[0]];
    let e1 = sub(&vertices[tet[1]], &p0);
    let e2 = sub(&vertices[tet[2]], &p0);
    let e3 = sub(&vertices[tet[3]], &p0);
    dot3(&e1, &cross(&e2, &e3)) / 6.0
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> [Point; 4] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        signed_volume(&self.vertices, &self.cells[c])
    }

    pub fn volume(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn num_interior_facets(&self) -> usize {
        self.interior_facets
    }

    pub fn num_boundary_facets(&self) -> usize {
        self.boundary_facets.len()
    }

    pub fn facet_area(&self, f: &BoundaryFacet) -> f64 {
        let [a, b, c] = f.vertices.map(|v| self.vertices[v]);
        let n = cross(&sub(&b, &a), &sub(&c, &a));
        0.5 * dot3(&n, &n).sqrt()
    }

    /// Longest cell edge.
    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths().fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_lengths().fold(f64::INFINITY, f64::min)
    }

    /// Shortest edge incident to vertex `v`.
    pub fn min_edge_at(&self, v: usize) -> f64 {
        let mut best = f64::INFINITY;
        for cell in &self.cells {
            if cell.contains(&v) {
                for &w in cell {
                    if w != v {
                        let d = sub(&self.vertices[w], &self.vertices[v]);
                        best = best.min(dot3(&d, &d).sqrt());
                    }
                }
            }
        }
        best
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().flat_map(move |cell| {
            (0..4).flat_map(move |a| {
                ((a + 1)..4).map(move |b| {
                    let d = sub(&self.vertices[cell[b]], &self.vertices[cell[a]]);
                    dot3(&d, &d).sqrt()
                })
            })
        })
    }

    fn compute_facets(&mut self) {
        let mut seen: HashMap<[usize; 3], (usize, usize, u32)> =
            HashMap::with_capacity(2 * self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            for skip in 0..4 {
                let mut f = [0usize; 3];
                let mut n = 0;
                for (l, &v) in cell.iter().enumerate() {
                    if l != skip {
                        f[n] = v;
                        n += 1;
                    }
                }
                f.sort_unstable();
                let e = seen.entry(f).or_insert((c, skip, 0));
                e.2 += 1;
            }
        }
        let mut boundary: Vec<(usize, usize, [usize; 3])> = Vec::new();
        let mut interior = 0;
        for (f, (c, skip, count)) in seen {
            if count == 1 {
                boundary.push((c, skip, f));
            } else {
                interior += 1;
            }
        }
        // deterministic order: by owning cell, then local facet
        boundary.sort_unstable_by_key(|&(c, skip, _)| (c, skip));
        self.interior_facets = interior;
        self.boundary_facets = boundary
            .into_iter()
            .map(|(c, skip, f)| {
                let [a, b, d] = f.map(|v| self.vertices[v]);
                let mut n = cross(&sub(&b, &a), &sub(&d, &a));
                let len = dot3(&n, &n).sqrt();
                n = n.map(|x| x / len);
                let opposite = self.vertices[self.cells[c][skip]];
                if dot3(&n, &sub(&opposite, &a)) > 0.0 {
                    n = n.map(|x| -x);
                }
                BoundaryFacet {
                    vertices: f,
                    normal: n,
                    cell: c,
                }
            })
            .collect();
    }
}
