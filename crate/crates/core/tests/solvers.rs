mod common;

use std::sync::Arc;

use common::{ci_meshes, diff, dot, max_abs, norm, probe, Elastic};
use proptest::prelude::*;
use rigid_neumann::fem::{assemble_form, Family, FormKind, FunctionSpace};
use rigid_neumann::formulations::{
    assemble_mixed, build_lagrange, build_mixed_double, build_mixed_single, pinned_dofs, pinpoint,
    precond_be, precond_bm, precond_mixed, solve_lagrange, BlockSystem, Lambda, LowRankUpdate,
    PinStrategy,
};
use rigid_neumann::harness::{mixed_load, ManufacturedCase};
use rigid_neumann::krylov::{
    cg, cg_singular, minres, pseudo_solve, FnOperator, Identity, LinearOperator, ProjectedInverse,
    RhsProjector, SolProjector, StopReason, StoppingRule,
};
use rigid_neumann::linalg::{sparse_cholesky, CsrMatrix, DenseMatrix};
use rigid_neumann::mesh::MeshParams;

fn dense_op(d: &DenseMatrix<f64>) -> impl LinearOperator<f64> + '_ {
    FnOperator::new(d.nrows(), move |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(&d.mul_vec(x))
    })
}

/// Dense matrix of an operator, column by column.
fn materialize(op: &dyn LinearOperator<f64>) -> DenseMatrix<f64> {
    let n = op.dim();
    let mut d = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        d.set_column(j, &op.apply_vec(&e));
        e[j] = 0.0;
    }
    d
}

fn spd(n: usize, seed: u64) -> DenseMatrix<f64> {
    let r = probe(n * n, seed);
    let q = DenseMatrix::from_fn(n, n, |i, j| r[i * n + j]);
    let mut a = q.transpose().matmul(&q);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    a
}

/// `Q diag(d) Qᵀ` with `Q` orthogonal and `d` uniform in `[lo, hi]`.
fn spd_with_spectrum(n: usize, seed: u64, lo: f64, hi: f64) -> DenseMatrix<f64> {
    let r = probe(n * n, seed);
    let s = DenseMatrix::from_fn(n, n, |i, j| r[i * n + j] + r[j * n + i]);
    let q = rigid_neumann::linalg::sym_eig(&s).unwrap().vectors;
    let d: Vec<f64> = probe(n, seed + 2)
        .iter()
        .map(|t| lo + (hi - lo) * 0.5 * (t + 1.0))
        .collect();
    let qd = DenseMatrix::from_fn(n, n, |i, j| q[(i, j)] * d[j]);
    let a = qd.matmul(&q.transpose());
    DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

fn linearity(op: &dyn LinearOperator<f64>, seed: u64) -> f64 {
    let n = op.dim();
    let (x, y) = (probe(n, seed), probe(n, seed + 1));
    let alpha = -1.7;
    let comb: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
    let lhs = op.apply_vec(&comb);
    let (ax, ay) = (op.apply_vec(&x), op.apply_vec(&y));
    let rhs: Vec<f64> = ax.iter().zip(&ay).map(|(a, b)| alpha * a + b).collect();
    norm(&diff(&lhs, &rhs)) / norm(&rhs).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cg_terminates_within_dimension(n in 1usize..=30, seed in 0u64..10_000) {
        let a = spd_with_spectrum(n, seed, 1.0, 10.0);
        let op = dense_op(&a);
        let b = probe(n, seed + 1);
        let r = cg(&op, &Identity(n), &b, &vec![0.0; n], &StoppingRule::relative(1e-12, 10 * n));
        prop_assert!(r.converged);
        prop_assert!(r.iterations <= n, "{} > {}", r.iterations, n);
        let res = diff(&a.mul_vec(&r.solution), &b);
        prop_assert!(norm(&res) <= 1e-8 * norm(&b) * a.max_abs());
    }

    #[test]
    fn minres_residual_never_increases(n in 2usize..=30, seed in 0u64..10_000) {
        let r = probe(n * n, seed);
        let s = DenseMatrix::from_fn(n, n, |i, j| r[i * n + j] + r[j * n + i] + if i == j { 0.1 } else { 0.0 });
        let op = dense_op(&s);
        let b = probe(n, seed + 1);
        let rep = minres(&op, &Identity(n), &b, &vec![0.0; n], &StoppingRule::relative(1e-10, 4 * n));
        for w in rep.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn operators_are_linear(seed in 0u64..1000) {
        let meshes = ci_meshes();
        let mesh = &meshes[seed as usize % meshes.len()].1;
        let e = Elastic::new(mesh, Family::P1Vector, 384.0, 577.0);
        let apm = e.a_plus_m();
        let b = vec![0.0; e.n()];
        let sys = build_lagrange(&e.a, &e.l2, &b).unwrap();
        prop_assert!(linearity(&sys, seed) <= 1e-13);
        let low_rank = LowRankUpdate { a: &e.a, cols: e.l2.w_columns() };
        prop_assert!(linearity(&low_rank, seed) <= 1e-13);
        let projected = ProjectedInverse { factor: &apm, basis: &e.ell2 };
        prop_assert!(linearity(&projected, seed) <= 1e-12);
        prop_assert!(linearity(&precond_bm(&apm), seed) <= 1e-12);
        // B_E applies an inner solve; linear up to its tolerance
        prop_assert!(linearity(&precond_be(&e.a, &e.l2, &apm), seed) <= 1e-9);
    }
}

#[test]
fn stopping_rules() {
    let a = spd(20, 5);
    let op = dense_op(&a);
    let b = probe(20, 6);
    let r = cg(
        &op,
        &Identity(20),
        &b,
        &vec![0.0; 20],
        &StoppingRule::relative(1e-14, 2),
    );
    assert!(!r.converged);
    assert_eq!(r.stop_reason, StopReason::MaxIterations);
    assert_eq!(r.iterations, 2);
    let r = cg(
        &op,
        &Identity(20),
        &b,
        &vec![0.0; 20],
        &StoppingRule::absolute(1e-6, 100),
    );
    assert!(r.converged && r.final_residual() <= 1e-6);
    // exact initial guess converges immediately
    let x = r.solution.clone();
    let bx = a.mul_vec(&x);
    let r = cg(
        &op,
        &Identity(20),
        &bx,
        &x,
        &StoppingRule::absolute(1e-10, 100),
    );
    assert_eq!(r.iterations, 0);
    // indefinite matrix breaks CG down
    let neg = DenseMatrix::from_fn(3, 3, |i, j| if i == j { [1.0, -1.0, 2.0][i] } else { 0.0 });
    let r = cg(
        &dense_op(&neg),
        &Identity(3),
        &[1.0, 1.0, 1.0],
        &[0.0; 3],
        &StoppingRule::relative(1e-12, 10),
    );
    assert!(matches!(r.stop_reason, StopReason::Breakdown(_)));
}

#[test]
fn singular_cg_stays_in_range() {
    for (name, mesh) in ci_meshes() {
        let e = Elastic::new(&mesh, Family::P1Vector, 384.0, 577.0);
        let apm = e.a_plus_m();
        let b = e.ell2.project_pz(&probe(e.n(), 11)).unwrap();
        let pc = ProjectedInverse {
            factor: &apm,
            basis: &e.ell2,
        };
        let r = cg(
            &*e.a,
            &pc,
            &b,
            &vec![0.0; e.n()],
            &StoppingRule::relative(1e-12, 2000),
        );
        assert!(r.converged, "{name}");
        let zx = e.ell2.yt(&r.solution);
        assert!(
            zx.iter().all(|v| v.abs() <= 1e-10 * norm(&r.solution)),
            "{name}: {zx:?}"
        );
    }
}

#[test]
fn pseudo_solve_properties() {
    for (name, mesh) in ci_meshes() {
        let e = Elastic::new(&mesh, Family::P1Vector, 384.0, 577.0);
        let apm = e.a_plus_m();
        let stop = StoppingRule::relative(1e-13, 2000);
        let b1 = e.ell2.project_pz(&probe(e.n(), 1)).unwrap();
        let b2 = e.ell2.project_pz(&probe(e.n(), 2)).unwrap();
        let x1 = pseudo_solve(&e.a, &e.ell2, &b1, &apm, &stop).unwrap();
        let x2 = pseudo_solve(&e.a, &e.ell2, &b2, &apm, &stop).unwrap();
        assert!(
            norm(&diff(&e.a.mul_vec(&x1), &b1)) <= 1e-9 * norm(&b1),
            "{name}: Ax = b"
        );
        assert!(
            e.ell2.yt(&x1).iter().all(|v| v.abs() <= 1e-12 * norm(&x1)),
            "{name}: Zᵀx"
        );
        let b3: Vec<f64> = b1.iter().zip(&b2).map(|(a, b)| 2.0 * a - b).collect();
        let x3 = pseudo_solve(&e.a, &e.ell2, &b3, &apm, &stop).unwrap();
        let lin: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a - b).collect();
        assert!(
            norm(&diff(&x3, &lin)) <= 1e-9 * norm(&lin),
            "{name}: linearity"
        );
        assert_eq!(
            pseudo_solve(&e.a, &e.ell2, &vec![0.0; e.n()], &apm, &stop).unwrap(),
            vec![0.0; e.n()]
        );
        assert!(
            pseudo_solve(&e.a, &e.ell2, e.ell2.y(0), &apm, &stop).is_err(),
            "{name}: incompatible"
        );
        assert!(
            pseudo_solve(&e.a, &e.l2, &b1, &apm, &stop).is_err(),
            "{name}: wrong mode"
        );
    }
}

#[test]
fn lagrange_system_structure() {
    for (name, mesh) in ci_meshes() {
        let e = Elastic::new(&mesh, Family::P1Vector, 384.0, 577.0);
        let b = probe(e.n(), 4);
        let sys = build_lagrange(&e.a, &e.l2, &b).unwrap();
        let d = sys.to_dense().unwrap();
        assert!(d.asymmetry() <= 1e-12 * d.max_abs(), "{name}");
        blockwise_matches_composed(&sys, 9);
        let apm = e.a_plus_m();
        if e.n() <= 300 {
            let bm = materialize(&precond_bm(&apm));
            assert!(bm.asymmetry() <= 1e-12 * bm.max_abs(), "{name}: B_M");
            assert!(
                rigid_neumann::linalg::sym_eigvals(&bm).unwrap()[0] > 0.0,
                "{name}: B_M positive"
            );
        }
        assert!(build_lagrange(&e.a, &e.ell2, &b).is_err());
    }
}

fn blockwise_matches_composed(sys: &BlockSystem, seed: u64) {
    let x = probe(sys.dim(), seed);
    let y = sys.apply_vec(&x);
    let parts = sys.split(&x);
    for r in 0..sys.num_blocks() {
        let row = sys.apply_row(r, &parts);
        let got = &y[sys.range(r)];
        assert!(
            norm(&diff(got, &row)) <= 1e-13 * norm(&row).max(1e-300),
            "block row {r}"
        );
    }
}

#[test]
fn mixed_systems() {
    let mesh = Arc::new(MeshParams::unit_cube(2).build().unwrap());
    let u = Arc::new(FunctionSpace::new(mesh.clone(), Family::P2Vector));
    let p = Arc::new(FunctionSpace::new(mesh, Family::P1Scalar));
    let blocks = assemble_mixed(&u, &p, 1.0).unwrap();
    let basis = rigid_neumann::rigid::RigidBasis::l2(&u, &blocks.m).unwrap();
    let b = mixed_load(&u);
    for lambda in [Lambda::Finite(1.0), Lambda::Finite(1e8), Lambda::Infinite] {
        let double = build_mixed_double(&blocks, &basis, lambda, &b).unwrap();
        let single = build_mixed_single(&blocks, &basis, lambda, &b).unwrap();
        for sys in [&double, &single] {
            let d = sys.to_dense().unwrap();
            assert!(d.asymmetry() <= 1e-12 * d.max_abs());
            blockwise_matches_composed(sys, 3);
        }
        // (Y, 0) ↦ (W, 0) on the single-saddle operator
        for k in 0..6 {
            let mut x = basis.y(k).to_vec();
            x.extend(vec![0.0; p.dof_count()]);
            let y = single.apply_vec(&x);
            let (yu, yp) = y.split_at(u.dof_count());
            assert!(max_abs(&diff(yu, basis.w(k))) <= 1e-10 * max_abs(basis.w(k)));
            assert!(max_abs(yp) <= 1e-10);
        }
    }
    // λ = ∞ leaves the pressure diagonal block empty
    let inf = build_mixed_double(&blocks, &basis, Lambda::Infinite, &b).unwrap();
    let d = inf.to_dense().unwrap();
    let r = inf.range(1);
    for i in r.clone() {
        for j in r.clone() {
            assert_eq!(d[(i, j)], 0.0);
        }
    }
}

#[test]
fn mixed_infinite_lambda_is_divergence_free() {
    let mesh = Arc::new(MeshParams::unit_cube(2).build().unwrap());
    let u = Arc::new(FunctionSpace::new(mesh.clone(), Family::P2Vector));
    let p = Arc::new(FunctionSpace::new(mesh, Family::P1Scalar));
    let blocks = assemble_mixed(&u, &p, 1.0).unwrap();
    let basis = rigid_neumann::rigid::RigidBasis::l2(&u, &blocks.m).unwrap();
    let b = mixed_load(&u);
    let apm = sparse_cholesky(&blocks.a.linear_combination(1.0, &blocks.m, 1.0).unwrap()).unwrap();
    let c = sparse_cholesky(&blocks.c).unwrap();
    let sys = build_mixed_double(&blocks, &basis, Lambda::Infinite, &b).unwrap();
    let pc = precond_mixed(&apm, &c, true);
    let r = minres(
        &sys,
        &pc,
        &sys.rhs,
        &vec![0.0; sys.dim()],
        &StoppingRule::relative(1e-12, 2000),
    );
    assert!(r.converged);
    let x = &r.solution;
    let uh = &x[..u.dof_count()];
    // second block row: Bᵀu = 0
    let div = blocks.b.mul_vec_transpose(uh);
    assert!(max_abs(&div) <= 1e-9 * max_abs(&b), "{}", max_abs(&div));
    assert!(basis.orthogonality_error(uh) <= 1e-9);
}

#[test]
fn pinpoint_strategies() {
    let mesh = Arc::new(
        rigid_neumann::harness::example_mesh_params(2, rigid_neumann::mesh::Grading::Uniform)
            .build()
            .unwrap(),
    );
    let vspace = Arc::new(FunctionSpace::new(mesh.clone(), Family::P1Vector));
    let sspace = FunctionSpace::new(mesh.clone(), Family::P1Scalar);
    assert_eq!(
        pinned_dofs(&vspace, PinStrategy::ThreeCirc).unwrap().len(),
        6
    );
    assert_eq!(
        pinned_dofs(&vspace, PinStrategy::ThreeDot).unwrap().len(),
        9
    );
    assert_eq!(pinned_dofs(&vspace, PinStrategy::OneTri).unwrap().len(), 9);
    assert_eq!(
        pinned_dofs(&sspace, PinStrategy::PoissonCorner).unwrap(),
        vec![mesh.corners[0]]
    );
    assert!(pinned_dofs(&sspace, PinStrategy::ThreeCirc).is_err());
    assert!(pinned_dofs(&vspace, PinStrategy::PoissonCorner).is_err());

    let case = ManufacturedCase::example(&mesh, None).unwrap();
    let a = assemble_form(
        FormKind::ElasticStiffness {
            mu: case.mu,
            lambda: case.lambda,
        },
        &vspace,
        &vspace,
    )
    .unwrap();
    let b = case.load(&vspace);
    let exact = case.interpolant(&vspace);
    for s in [
        PinStrategy::ThreeCirc,
        PinStrategy::OneTri,
        PinStrategy::ThreeTri,
        PinStrategy::ThreeDot,
    ] {
        let pinned = pinpoint(&a, &b, &vspace, s, &exact).unwrap();
        assert!(pinned.a.asymmetry() == 0.0, "{s}");
        let x = sparse_cholesky(&pinned.a).unwrap().solve(&pinned.b);
        for &d in &pinned.dofs {
            assert!((x[d] - exact[d]).abs() <= 1e-12 * max_abs(&exact), "{s}");
        }
    }
}

#[test]
fn lagrange_minres_recovers_perturbation() {
    let mesh = Arc::new(
        rigid_neumann::harness::example_mesh_params(2, rigid_neumann::mesh::Grading::Uniform)
            .build()
            .unwrap(),
    );
    let pert = [1.0, -2.0, 3.0, 0.5, -0.25, 4.0];
    let case = ManufacturedCase::example(&mesh, Some(pert)).unwrap();
    let e = Elastic::new(&mesh, Family::P1Vector, case.mu, case.lambda);
    let b = case.load(&e.space);
    let sys = build_lagrange(&e.a, &e.l2, &b).unwrap();
    let apm = e.a_plus_m();
    let sol = solve_lagrange(
        &sys,
        &precond_bm(&apm),
        None,
        &StoppingRule::relative(1e-12, 500),
    );
    assert!(sol.report.converged);
    for k in 0..6 {
        assert!(
            (sol.multiplier[k] - pert[k]).abs() <= 1e-6 * max_abs(&pert),
            "{k}: {:?}",
            sol.multiplier
        );
    }
}

#[test]
fn cg_singular_variants() {
    let mesh = Arc::new(
        rigid_neumann::harness::example_mesh_params(2, rigid_neumann::mesh::Grading::Uniform)
            .build()
            .unwrap(),
    );
    let case = ManufacturedCase::example(&mesh, None).unwrap();
    let e = Elastic::new(&mesh, Family::P1Vector, case.mu, case.lambda);
    let b = case.load(&e.space);
    let apm = e.a_plus_m();
    let pc = ProjectedInverse {
        factor: &apm,
        basis: &e.ell2,
    };
    let stop = StoppingRule::relative(1e-12, 2000);
    let solve = |rhs, sol| cg_singular(&e.a, &e.l2, &e.ell2, rhs, sol, &pc, &b, &stop).unwrap();
    let tp = solve(RhsProjector::Pt, SolProjector::P);
    assert!(tp.report.converged);
    assert!(tp.orth_l2 <= 1e-12);
    let zz = solve(RhsProjector::Pz, SolProjector::Pz);
    assert!(zz.orth_ell2 <= 1e-12);
    let none = solve(RhsProjector::Pt, SolProjector::None);
    // P applied afterwards reproduces the projected variant
    let projected = e.l2.project_p(&none.report.solution).unwrap();
    assert!(norm(&diff(&projected, &tp.report.solution)) <= 1e-10 * norm(&tp.report.solution));
    assert!(cg_singular(
        &e.a,
        &e.ell2,
        &e.ell2,
        RhsProjector::Pt,
        SolProjector::P,
        &pc,
        &b,
        &stop
    )
    .is_err());
    let _ = dot(&b, &b);
}

#[test]
fn csr_rejects_bad_layouts() {
    assert!(CsrMatrix::<f64>::try_from_parts(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
    assert!(CsrMatrix::<f64>::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    let a = CsrMatrix::<f64>::identity(3);
    let b = CsrMatrix::<f64>::identity(4);
    assert!(a.linear_combination(1.0, &b, 1.0).is_err());
}
