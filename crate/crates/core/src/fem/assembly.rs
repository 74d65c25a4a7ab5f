//! Assembly of bilinear and linear forms.

use super::quadrature::{tet_rule, tri_rule};
use super::space::{basis_gradients, basis_values, CellGeometry, Family, FunctionSpace};
use crate::linalg::CsrMatrix;
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormKind {
    /// `2μ(ε(u), ε(v)) + λ(∇·u, ∇·v)`
    ElasticStiffness {
        mu: f64,
        lambda: f64,
    },
    /// `2μ(ε(u), ε(v))`
    EpsilonStiffness {
        mu: f64,
    },
    VectorMass,
    ScalarMass,
    ScalarStiffness,
    /// `(p, ∇·v)` with scalar trial `p` and vector test `v`.
    DivCoupling,
    /// `(u, v) + (∇u, ∇v)` on either a scalar or a vector space.
    H1Inner,
}

impl FormKind {
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, FormKind::DivCoupling)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error("trial and test spaces live on different meshes")]
    MeshMismatch,
    #[error("form {kind} is not defined for trial {trial:?} / test {test:?}")]
    IncompatibleSpaces {
        kind: String,
        trial: Family,
        test: Family,
    },
    #[error("invalid material parameters mu={mu}, lambda={lambda}")]
    InvalidMaterial { mu: f64, lambda: f64 },
}

fn check(kind: FormKind, trial: &FunctionSpace, test: &FunctionSpace) -> Result<(), AssemblyError> {
    if !trial.same_mesh(test) {
        return Err(AssemblyError::MeshMismatch);
    }
    let (tr, te) = (trial.family(), test.family());
    let vector = |f: Family| f.value_dim() == 3;
    let ok = match kind {
        FormKind::ElasticStiffness { mu, lambda } => {
            if !(mu > 0.0) || !(lambda >= 0.0) || !lambda.is_finite() {
                return Err(AssemblyError::InvalidMaterial { mu, lambda });
            }
            tr == te && vector(tr)
        }
        FormKind::EpsilonStiffness { mu } => {
            if !(mu > 0.0) {
                return Err(AssemblyError::InvalidMaterial { mu, lambda: 0.0 });
            }
            tr == te && vector(tr)
        }
        FormKind::VectorMass => tr == te && vector(tr),
        FormKind::ScalarMass | FormKind::ScalarStiffness => tr == te && !vector(tr),
        FormKind::H1Inner => tr == te,
        FormKind::DivCoupling => !vector(tr) && vector(te),
    };
    if ok {
        Ok(())
    } else {
        Err(AssemblyError::IncompatibleSpaces {
            kind: format!("{kind:?}"),
            trial: tr,
            test: te,
        })
    }
}

fn quadrature_degree(kind: FormKind, trial: Family, test: Family) -> usize {
    let p = trial.degree().max(test.degree());
    if p >= 2 {
        return 4;
    }
    match kind {
        FormKind::ElasticStiffness { .. }
        | FormKind::EpsilonStiffness { .. }
        | FormKind::ScalarStiffness => 1,
        _ => 2,
    }
}

/// Sparsity pattern from node adjacency, expanded to dofs.
fn pattern(trial: &FunctionSpace, test: &FunctionSpace) -> CsrMatrix<f64> {
    let mesh = test.mesh();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); test.num_nodes()];
    for c in 0..mesh.num_cells() {
        let tn = trial.cell_nodes(c);
        for &a in test.cell_nodes(c) {
            adj[a].extend_from_slice(tn);
        }
    }
    for row in adj.iter_mut() {
        row.sort_unstable();
        row.dedup();
    }
    let (dr, dc) = (test.value_dim(), trial.value_dim());
    let n_rows = test.dof_count();
    let mut row_ptr = Vec::with_capacity(n_rows + 1);
    row_ptr.push(0usize);
    let nnz: usize = adj.iter().map(|r| r.len()).sum::<usize>() * dr * dc;
    let mut col_idx = Vec::with_capacity(nnz);
    for row in &adj {
        for _ in 0..dr {
            for &b in row {
                for d in 0..dc {
                    col_idx.push(dc * b + d);
                }
            }
            row_ptr.push(col_idx.len());
        }
    }
    let values = vec![0.0; col_idx.len()];
    CsrMatrix::try_from_parts(n_rows, trial.dof_count(), row_ptr, col_idx, values)
        .expect("pattern is sorted by construction")
}

/// Assembles `kind` into a `test.dof_count() × trial.dof_count()` matrix.
pub fn assemble_form(
    kind: FormKind,
    trial: &FunctionSpace,
    test: &FunctionSpace,
) -> Result<CsrMatrix<f64>, AssemblyError> {
    check(kind, trial, test)?;
    let mesh = test.mesh();
    let mut mat = pattern(trial, test);
    let rule = tet_rule(quadrature_degree(kind, trial.family(), test.family()));
    let (dr, dc) = (test.value_dim(), trial.value_dim());
    let (pr, pc) = (test.family().degree(), trial.family().degree());
    let (nr, nc) = (
        test.family().nodes_per_cell(),
        trial.family().nodes_per_cell(),
    );
    let (lr, lc) = (nr * dr, nc * dc);
    let mut local = vec![0.0; lr * lc];
    let mut phi_r = vec![0.0; nr];
    let mut phi_c = vec![0.0; nc];
    let mut grad_r = vec![[0.0; 3]; nr];
    let mut grad_c = vec![[0.0; 3]; nc];
    let symmetric = kind.is_symmetric();

    for cell in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh.cell_points(cell));
        local.iter_mut().for_each(|v| *v = 0.0);
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let wq = w * 6.0 * geo.volume;
            basis_values(pr, l, &mut phi_r);
            basis_values(pc, l, &mut phi_c);
            basis_gradients(pr, l, &geo.grad_bary, &mut grad_r);
            basis_gradients(pc, l, &geo.grad_bary, &mut grad_c);
            for a in 0..nr {
                for b in 0..nc {
                    let ga = &grad_r[a];
                    let gb = &grad_c[b];
                    let gg = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
                    let mm = phi_r[a] * phi_c[b];
                    match kind {
                        FormKind::ElasticStiffness { mu, lambda } => {
                            for c in 0..3 {
                                for d in 0..3 {
                                    let mut v = mu * ga[d] * gb[c] + lambda * ga[c] * gb[d];
                                    if c == d {
                                        v += mu * gg;
                                    }
                                    local[(3 * a + c) * lc + 3 * b + d] += wq * v;
                                }
                            }
                        }
                        FormKind::EpsilonStiffness { mu } => {
                            for c in 0..3 {
                                for d in 0..3 {
                                    let mut v = mu * ga[d] * gb[c];
                                    if c == d {
                                        v += mu * gg;
                                    }
                                    local[(3 * a + c) * lc + 3 * b + d] += wq * v;
                                }
                            }
                        }
                        FormKind::VectorMass => {
                            for c in 0..3 {
                                local[(3 * a + c) * lc + 3 * b + c] += wq * mm;
                            }
                        }
                        FormKind::ScalarMass => local[a * lc + b] += wq * mm,
                        FormKind::ScalarStiffness => local[a * lc + b] += wq * gg,
                        FormKind::H1Inner => {
                            for c in 0..dr {
                                local[(dr * a + c) * lc + dc * b + c] += wq * (mm + gg);
                            }
                        }
                        FormKind::DivCoupling => {
                            for c in 0..3 {
                                local[(3 * a + c) * lc + b] += wq * phi_c[b] * ga[c];
                            }
                        }
                    }
                }
            }
        }
        if symmetric {
            // mirror the upper triangle so the assembled matrix is bitwise symmetric
            for i in 0..lr {
                for j in 0..i {
                    local[i * lc + j] = local[j * lc + i];
                }
            }
        }
        let rdofs = test.cell_dofs(cell);
        let cdofs = trial.cell_dofs(cell);
        for (i, &gi) in rdofs.iter().enumerate() {
            for (j, &gj) in cdofs.iter().enumerate() {
                mat.add_to(gi, gj, local[i * lc + j])
                    .expect("entry in pattern");
            }
        }
    }
    Ok(mat)
}

/// `b_i = ∫_Ω f·φ_i + ∫_∂Ω h·φ_i`, with volume and facet rules of degree `degree`.
/// `h` receives the point and the outward unit normal.
pub fn assemble_load_with_degree(
    space: &FunctionSpace,
    f: &dyn Fn(&Point) -> [f64; 3],
    h: Option<&dyn Fn(&Point, &Point) -> [f64; 3]>,
    degree: usize,
) -> Vec<f64> {
    let mesh = space.mesh();
    let d = space.value_dim();
    let p = space.family().degree();
    let npc = space.family().nodes_per_cell();
    let mut b = vec![0.0; space.dof_count()];
    let mut phi = vec![0.0; npc];
    let rule = tet_rule(degree);
    for cell in 0..mesh.num_cells() {
        let geo = CellGeometry::new(mesh.cell_points(cell));
        let nodes = space.cell_nodes(cell);
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map(l);
            let fx = f(&x);
            let wq = w * 6.0 * geo.volume;
            basis_values(p, l, &mut phi);
            for (a, &n) in nodes.iter().enumerate() {
                for c in 0..d {
                    b[d * n + c] += wq * phi[a] * fx[c];
                }
            }
        }
    }
    if let Some(h) = h {
        let frule = tri_rule(degree);
        for facet in &mesh.boundary_facets {
            let cell = facet.cell;
            let cverts = mesh.cells[cell];
            let geo = CellGeometry::new(mesh.cell_points(cell));
            let nodes = space.cell_nodes(cell);
            let local = facet.vertices.map(|v| {
                cverts
                    .iter()
                    .position(|&w| w == v)
                    .expect("facet vertex in owner")
            });
            let area = mesh.facet_area(facet);
            for (s, &w) in frule.points.iter().zip(&frule.weights) {
                let mut l = [0.0; 4];
                for k in 0..3 {
                    l[local[k]] = s[k];
                }
                let x = geo.map(&l);
                let hx = h(&x, &facet.normal);
                let wq = w * 2.0 * area;
                basis_values(p, &l, &mut phi);
                for (a, &n) in nodes.iter().enumerate() {
                    if phi[a] == 0.0 {
                        continue;
                    }
                    for c in 0..d {
                        b[d * n + c] += wq * phi[a] * hx[c];
                    }
                }
            }
        }
    }
    b
}

/// Load vector with degree-4 rules.
pub fn assemble_load(
    space: &FunctionSpace,
    f: &dyn Fn(&Point) -> [f64; 3],
    h: Option<&dyn Fn(&Point, &Point) -> [f64; 3]>,
) -> Vec<f64> {
    assemble_load_with_degree(space, f, h, 4)
}
