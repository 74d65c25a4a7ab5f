use super::{LinearOperator, SolveReport, StopReason, StoppingRule};
use crate::scalar::{axpy, dot, Real};

/// Preconditioned conjugate gradients. Convergence is measured in the
/// preconditioned norm `sqrt(rᵀ B r)`.
pub fn cg<T: Real>(
    a: &dyn LinearOperator<T>,
    b_op: &dyn LinearOperator<T>,
    b: &[T],
    x0: &[T],
    stop: &StoppingRule,
) -> SolveReport<T> {
    let n = b.len();
    assert_eq!(a.dim(), n, "operator dimension");
    assert_eq!(x0.len(), n, "initial guess dimension");
    let mut x = x0.to_vec();
    let mut r = a.apply_vec(&x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = b_op.apply_vec(&r);
    let mut rz = dot(&r, &z);
    if !rz.is_finite() {
        return SolveReport::finish(x, vec![rz], StopReason::NotFinite);
    }
    if rz < T::zero() {
        return SolveReport::finish(
            x,
            vec![rz.abs().sqrt()],
            StopReason::Breakdown("indefinite preconditioner".into()),
        );
    }
    let r0 = rz.sqrt();
    let mut history = vec![r0];
    let target = stop.target(r0);
    if r0 <= target {
        return SolveReport::finish(x, history, StopReason::Converged);
    }
    let mut p = z.clone();
    let mut q = vec![T::zero(); n];
    for _ in 0..stop.max_iterations {
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !pq.is_finite() {
            return SolveReport::finish(x, history, StopReason::NotFinite);
        }
        if pq <= T::zero() {
            return SolveReport::finish(
                x,
                history,
                StopReason::Breakdown("operator not SPSD on Krylov space".into()),
            );
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        b_op.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        if !rz_new.is_finite() {
            return SolveReport::finish(x, history, StopReason::NotFinite);
        }
        if rz_new < T::zero() {
            return SolveReport::finish(
                x,
                history,
                StopReason::Breakdown("indefinite preconditioner".into()),
            );
        }
        let res = rz_new.sqrt();
        history.push(res);
        if res <= target {
            return SolveReport::finish(x, history, StopReason::Converged);
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    SolveReport::finish(x, history, StopReason::MaxIterations)
}
