use super::{LinearOperator, SolveReport, StopReason, StoppingRule};
use crate::scalar::{dot, Real};

/// Preconditioned MinRes (Paige–Saunders) for symmetric, possibly indefinite
/// `A` and SPD preconditioner `B`. The recorded residual is the recurrence
/// estimate of `sqrt(rᵀ B r)`, which never increases.
pub fn minres<T: Real>(
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
    let mut r1 = a.apply_vec(&x);
    for (ri, &bi) in r1.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut y = b_op.apply_vec(&r1);
    let beta1_sq = dot(&r1, &y);
    if !beta1_sq.is_finite() {
        return SolveReport::finish(x, vec![beta1_sq], StopReason::NotFinite);
    }
    if beta1_sq < T::zero() {
        return SolveReport::finish(
            x,
            vec![beta1_sq.abs().sqrt()],
            StopReason::Breakdown("indefinite preconditioner".into()),
        );
    }
    let beta1 = beta1_sq.sqrt();
    let mut history = vec![beta1];
    let target = stop.target(beta1);
    if beta1 <= target {
        return SolveReport::finish(x, history, StopReason::Converged);
    }

    let zero = T::zero();
    let mut r2 = r1.clone();
    let mut oldb = zero;
    let mut beta = beta1;
    let mut dbar = zero;
    let mut epsln = zero;
    let mut phibar = beta1;
    let mut cs = -T::one();
    let mut sn = zero;
    let mut w = vec![zero; n];
    let mut w1 = vec![zero; n];
    let mut w2 = vec![zero; n];
    let mut v = vec![zero; n];
    let mut av = vec![zero; n];

    for itn in 0..stop.max_iterations {
        let s = T::one() / beta;
        for (vi, &yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.apply(&v, &mut av);
        if itn >= 1 {
            let f = beta / oldb;
            for (ai, &ri) in av.iter_mut().zip(&r1) {
                *ai -= f * ri;
            }
        }
        let alfa = dot(&v, &av);
        let f = alfa / beta;
        for (ai, &ri) in av.iter_mut().zip(&r2) {
            *ai -= f * ri;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&av);
        b_op.apply(&r2, &mut y);
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if !beta_sq.is_finite() || !alfa.is_finite() {
            return SolveReport::finish(x, history, StopReason::NotFinite);
        }
        if beta_sq < zero {
            return SolveReport::finish(
                x,
                history,
                StopReason::Breakdown("indefinite preconditioner".into()),
            );
        }
        beta = beta_sq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(T::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        let denom = T::one() / gamma;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        let res = phibar.abs();
        history.push(res);
        if res <= target {
            return SolveReport::finish(x, history, StopReason::Converged);
        }
        if beta == zero {
            // invariant Krylov space: x is exact for the projected problem
            return SolveReport::finish(
                x,
                history,
                StopReason::Breakdown("Lanczos breakdown".into()),
            );
        }
    }
    SolveReport::finish(x, history, StopReason::MaxIterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Identity;
    use crate::linalg::{CsrMatrix, DenseMatrix};

    #[test]
    fn indefinite_diagonal_in_two_steps() {
        let a = CsrMatrix::<f64>::from_dense(&DenseMatrix::diag(&[1.0, -1.0]));
        let r = minres(
            &a,
            &Identity(2),
            &[1.0, 2.0],
            &[0.0; 2],
            &StoppingRule::relative(1e-12, 10),
        );
        assert!(r.converged && r.iterations <= 2, "{r:?}");
        assert!((r.solution[0] - 1.0).abs() < 1e-12 && (r.solution[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn history_is_monotone_on_saddle() {
        let n = 12;
        let d = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i < 8 {
                    2.0 + i as f64
                } else {
                    0.0
                }
            } else if i < 8 && j >= 8 && i / 2 == j - 8 {
                1.0 + i as f64 * 0.1
            } else if j < 8 && i >= 8 && j / 2 == i - 8 {
                1.0 + j as f64 * 0.1
            } else if i < 8 && j < 8 && i.abs_diff(j) == 1 {
                -0.5
            } else {
                0.0
            }
        });
        let a = CsrMatrix::from_dense(&d);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let r = minres(
            &a,
            &Identity(n),
            &b,
            &vec![0.0; n],
            &StoppingRule::relative(1e-12, 100),
        );
        assert!(r.converged);
        assert!(r
            .residual_history
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        let ax = a.mul_vec(&r.solution);
        let err = ax
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9);
    }
}
