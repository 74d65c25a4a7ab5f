mod common;

use std::sync::Arc;

use common::{ci_meshes, dot, p1_energy, probe};
use nalgebra::Matrix3;
use proptest::prelude::*;
use rigid_neumann::fem::{
    assemble_form, assemble_load, error_norms, interpolate, Family, FormKind, FunctionSpace,
};
use rigid_neumann::harness::{
    example_mesh_params, u_star, u_star_grad, EXAMPLE_LAMBDA, EXAMPLE_MU,
};
use rigid_neumann::linalg::sym_eigvals;
use rigid_neumann::mesh::{build_box_mesh, transform_mesh, Grading, Mesh, MeshParams, Placement};
use rigid_neumann::rigid::RigidBasis;

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn box_volume(bounds: &[[f64; 2]; 3]) -> f64 {
    bounds.iter().map(|b| b[1] - b[0]).product()
}

fn check_mesh(name: &str, mesh: &Mesh) {
    let vol: f64 = (0..mesh.num_cells()).map(|c| mesh.cell_volume(c)).sum();
    for c in 0..mesh.num_cells() {
        assert!(
            mesh.cell_volume(c) > 0.0,
            "{name}: cell {c} not positively oriented"
        );
    }
    assert_eq!(
        4 * mesh.num_cells(),
        2 * mesh.num_interior_facets() + mesh.num_boundary_facets(),
        "{name}: facet count"
    );
    let area: f64 = mesh
        .boundary_facets
        .iter()
        .map(|f| mesh.facet_area(f))
        .sum();
    assert!(area > 0.0);
    for f in &mesh.boundary_facets {
        let n = f.normal;
        assert!(
            ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() < 1e-12,
            "{name}: normal length"
        );
        let fc =
            [0, 1, 2].map(|k| f.vertices.iter().map(|&v| mesh.vertices[v][k]).sum::<f64>() / 3.0);
        let cc = [0, 1, 2].map(|k| {
            mesh.cells[f.cell]
                .iter()
                .map(|&v| mesh.vertices[v][k])
                .sum::<f64>()
                / 4.0
        });
        let out = (0..3).map(|k| n[k] * (fc[k] - cc[k])).sum::<f64>();
        assert!(out > 0.0, "{name}: inward normal");
        assert!(
            f.vertices.iter().all(|v| mesh.cells[f.cell].contains(v)),
            "{name}: facet owner"
        );
    }
    assert!((vol - mesh.volume()).abs() <= 1e-14 * vol);
}

#[test]
fn ci_meshes_are_valid() {
    for (name, mesh) in ci_meshes() {
        check_mesh(name, &mesh);
    }
}

#[test]
fn volumes_match_boxes() {
    for (params, expected) in [
        (MeshParams::unit_cube(3), 1.0),
        (example_mesh_params(2, Grading::Uniform), 0.125),
        (
            example_mesh_params(
                4,
                Grading::TowardEdge {
                    axis: 2,
                    corner: 0,
                    beta: 2.0,
                },
            ),
            0.125,
        ),
    ] {
        let mesh = params.build().unwrap();
        assert!(
            (mesh.volume() - expected).abs() <= 1e-12 * expected,
            "{}",
            mesh.volume()
        );
    }
}

#[test]
fn cell_counts() {
    for (n, cells) in [(1, 6), (2, 48), (4, 384), (8, 3072)] {
        let mesh = MeshParams::unit_cube(n).build().unwrap();
        assert_eq!(mesh.num_cells(), cells);
        assert_eq!(mesh.num_vertices(), (n + 1).pow(3));
        assert_eq!(mesh.num_boundary_facets(), 12 * n * n);
    }
}

#[test]
fn refinement_doubles_divisions() {
    let p = example_mesh_params(2, Grading::Uniform);
    let fine = rigid_neumann::mesh::refine(&p).unwrap();
    assert_eq!(fine.num_cells(), 8 * p.build().unwrap().num_cells());
}

#[test]
fn vertex_grading_first_edge() {
    let mut prev: Option<f64> = None;
    for n in [4, 8, 16] {
        let mut p = MeshParams::unit_cube(n);
        p.grading = Grading::TowardVertex {
            corner: 0,
            beta: 2.0,
        };
        let mesh = p.build().unwrap();
        let h = mesh.min_edge_at(mesh.corners[0]);
        assert!((h - 1.0 / (n * n) as f64).abs() < 1e-14, "{h}");
        if let Some(hp) = prev {
            assert!((hp / h - 4.0f64).abs() < 1e-10);
        }
        prev = Some(h);
    }
    let mesh = MeshParams {
        grading: Grading::TowardVertex {
            corner: 0,
            beta: 2.0,
        },
        ..MeshParams::unit_cube(4)
    }
    .build()
    .unwrap();
    assert!((mesh.min_edge_at(mesh.corners[0]) - 0.0625).abs() < 1e-15);
}

#[test]
fn edge_grading_keeps_graded_axis_uniform() {
    let g = Grading::TowardEdge {
        axis: 2,
        corner: 0,
        beta: 2.0,
    };
    let mesh = build_box_mesh([[0.0, 1.0]; 3], [4; 3], g).unwrap();
    let mut zs: Vec<f64> = mesh.vertices.iter().map(|v| v[2]).collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    assert_eq!(zs.len(), 5);
    for (k, z) in zs.iter().enumerate() {
        assert!((z - k as f64 / 4.0).abs() < 1e-14);
    }
    let mut xs: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    assert!((xs[1] - 0.0625).abs() < 1e-14);
}

#[test]
fn invalid_parameters_rejected() {
    assert!(build_box_mesh([[0.0, 1.0]; 3], [0, 1, 1], Grading::Uniform).is_err());
    assert!(build_box_mesh(
        [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]],
        [1; 3],
        Grading::Uniform
    )
    .is_err());
    assert!(build_box_mesh(
        [[0.0, 1.0]; 3],
        [2; 3],
        Grading::TowardVertex {
            corner: 0,
            beta: 0.5
        }
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn placement_is_rigid(
        ax in -3.2f64..3.2, ay in -3.2f64..3.2, az in -3.2f64..3.2,
        tx in -2.0f64..2.0, ty in -2.0f64..2.0, tz in -2.0f64..2.0,
        n in 1usize..4,
    ) {
        let base = build_box_mesh([[0.0, 1.0], [0.0, 0.5], [-0.25, 0.25]], [n; 3], Grading::Uniform).unwrap();
        let moved = transform_mesh(&base, [ax, ay, az], [tx, ty, tz]);
        for i in 0..base.num_vertices() {
            for j in (i + 1)..base.num_vertices() {
                let d0 = dist(&base.vertices[i], &base.vertices[j]);
                let d1 = dist(&moved.vertices[i], &moved.vertices[j]);
                prop_assert!((d0 - d1).abs() <= 1e-13 * (1.0 + d0));
            }
        }
        for c in 0..base.num_cells() {
            prop_assert!(moved.cell_volume(c) > 0.0);
        }
        prop_assert!((moved.volume() - 0.25).abs() < 1e-13);
        check_mesh("moved", &moved);
    }

    #[test]
    fn graded_boxes_fill_their_bounds(
        lx in 0.1f64..3.0, ly in 0.1f64..3.0, lz in 0.1f64..3.0,
        nx in 1usize..5, ny in 1usize..5, nz in 1usize..5,
        corner in 0u8..8, beta in 1.0f64..3.0, vertex in proptest::bool::ANY,
    ) {
        let bounds = [[-lx / 2.0, lx / 2.0], [0.0, ly], [1.0, 1.0 + lz]];
        let grading = if vertex {
            Grading::TowardVertex { corner, beta }
        } else {
            Grading::TowardEdge { axis: (corner % 3) as usize, corner, beta }
        };
        let mesh = build_box_mesh(bounds, [nx, ny, nz], grading).unwrap();
        prop_assert!((mesh.volume() - box_volume(&bounds)).abs() <= 1e-12 * box_volume(&bounds));
        prop_assert_eq!(mesh.num_cells(), 6 * nx * ny * nz);
        check_mesh("graded", &mesh);
    }
}

fn rotation_of(p: &Placement) -> Matrix3<f64> {
    let r = p.rotation();
    Matrix3::from_fn(|i, j| r[i][j])
}

#[test]
fn rotation_is_orthogonal() {
    let p = Placement {
        angles: [0.4, -1.3, 2.2],
        translation: [0.0; 3],
    };
    let r = rotation_of(&p);
    assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-14);
    assert!((r.determinant() - 1.0).abs() < 1e-14);
}

#[test]
fn elastic_energy_matches_affine_fit() {
    for (name, mesh) in ci_meshes() {
        let space = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Vector));
        let a = assemble_form(
            FormKind::ElasticStiffness {
                mu: EXAMPLE_MU,
                lambda: EXAMPLE_LAMBDA,
            },
            &space,
            &space,
        )
        .unwrap();
        for seed in 0..5 {
            let u = probe(space.dof_count(), seed);
            let quad = dot(&u, &a.mul_vec(&u));
            let fit = p1_energy(&mesh, &u, EXAMPLE_MU, EXAMPLE_LAMBDA);
            assert!((quad - fit).abs() <= 1e-10 * fit, "{name}: {quad} vs {fit}");
        }
    }
}

#[test]
fn scalar_forms_match_closed_forms() {
    let mesh = Arc::new(MeshParams::unit_cube(2).build().unwrap());
    let space = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Scalar));
    let k = assemble_form(FormKind::ScalarStiffness, &space, &space).unwrap();
    let m = assemble_form(FormKind::ScalarMass, &space, &space).unwrap();
    // u = x + 2y − z: |∇u|² = 6, ∫u² by exact integration of a quadratic
    let u = interpolate(&space, &|x| [x[0] + 2.0 * x[1] - x[2], 0.0, 0.0]).values;
    assert!((dot(&u, &k.mul_vec(&u)) - 6.0).abs() < 1e-12);
    let one = vec![1.0; space.dof_count()];
    assert!((dot(&one, &m.mul_vec(&one)) - 1.0).abs() < 1e-13);
    // ∫ (x + 2y − z)² over the unit cube = 1/3 + 4/3 + 1/3 + 2(2·¼ − ¼ − 2·¼) = 2 − ½
    assert!((dot(&u, &m.mul_vec(&u)) - 1.5).abs() < 1e-12);
}

#[test]
fn forms_are_symmetric_and_mass_positive() {
    for (name, mesh) in ci_meshes().into_iter().take(3) {
        for fam in [Family::P1Vector, Family::P2Vector] {
            let space = FunctionSpace::new(mesh.clone(), fam);
            for kind in [
                FormKind::ElasticStiffness {
                    mu: 2.0,
                    lambda: 3.0,
                },
                FormKind::EpsilonStiffness { mu: 1.0 },
                FormKind::VectorMass,
                FormKind::H1Inner,
            ] {
                let a = assemble_form(kind, &space, &space).unwrap();
                assert!(
                    a.asymmetry() <= 1e-14 * a.max_abs(),
                    "{name} {fam:?} {kind:?}"
                );
            }
            let m = assemble_form(FormKind::VectorMass, &space, &space).unwrap();
            if m.nrows() <= 400 {
                let ev = sym_eigvals(&m.to_dense()).unwrap();
                assert!(ev[0] > 0.0, "{name}: mass not positive definite");
            }
        }
    }
}

#[test]
fn div_coupling_integrates_divergence() {
    for (name, mesh) in ci_meshes() {
        let u = Arc::new(FunctionSpace::new(mesh.clone(), Family::P2Vector));
        let p = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Scalar));
        let b = assemble_form(FormKind::DivCoupling, &p, &u).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (u.dof_count(), p.dof_count()));
        // v = (x, y², 0): ∇·v = 1 + 2y
        let v = interpolate(&u, &|x| [x[0], x[1] * x[1], 0.0]).values;
        let ones = vec![3.0; p.dof_count()];
        let lhs = dot(&v, &b.mul_vec(&ones));
        let cy: f64 = (0..mesh.num_cells())
            .map(|c| {
                let pts = mesh.cell_points(c);
                mesh.cell_volume(c) * pts.iter().map(|q| q[1]).sum::<f64>() / 4.0
            })
            .sum();
        let expected = 3.0 * (mesh.volume() + 2.0 * cy);
        assert!(
            (lhs - expected).abs() <= 1e-12 * expected.abs().max(1.0),
            "{name}: {lhs} vs {expected}"
        );
    }
}

#[test]
fn rigid_loads_are_dual_basis() {
    for (name, mesh) in ci_meshes() {
        for fam in [Family::P1Vector, Family::P2Vector] {
            let space = FunctionSpace::new(mesh.clone(), fam);
            let m = assemble_form(FormKind::VectorMass, &space, &space).unwrap();
            let basis = RigidBasis::l2(&space, &m).unwrap();
            for k in 0..6 {
                let z = basis.motions[k];
                let load = assemble_load(&space, &|x| z.eval(x), None);
                let w = basis.w(k);
                let err = load
                    .iter()
                    .zip(w)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(err <= 1e-12 * scale, "{name} {fam:?} k={k}: {err}");
            }
        }
    }
}

#[test]
fn interpolation_rates() {
    for (fam, expected) in [(Family::P1Vector, 1.0), (Family::P2Vector, 2.0)] {
        let errs: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&n| {
                let mesh = Arc::new(example_mesh_params(n, Grading::Uniform).build().unwrap());
                let space = Arc::new(FunctionSpace::new(mesh, fam));
                let f = interpolate(&space, &u_star);
                error_norms(&f, &u_star, &u_star_grad).h1_error
            })
            .collect();
        let r = (errs[1] / errs[2]).log2();
        assert!((r - expected).abs() < 0.15, "{fam:?}: rate {r}");
    }
}

#[test]
fn mismatched_spaces_rejected() {
    let mesh = Arc::new(MeshParams::unit_cube(1).build().unwrap());
    let other = Arc::new(MeshParams::unit_cube(1).build().unwrap());
    let s = FunctionSpace::new(mesh.clone(), Family::P1Scalar);
    let v = FunctionSpace::new(mesh, Family::P1Vector);
    let w = FunctionSpace::new(other, Family::P1Vector);
    assert!(assemble_form(FormKind::VectorMass, &s, &s).is_err());
    assert!(assemble_form(FormKind::VectorMass, &v, &w).is_err());
    assert!(assemble_form(
        FormKind::ElasticStiffness {
            mu: -1.0,
            lambda: 1.0
        },
        &v,
        &v
    )
    .is_err());
}
