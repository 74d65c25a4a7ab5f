//! Dense symmetric eigensolvers.
//!
//! `sym_eig` reduces to tridiagonal form with Householder reflections and then
//! runs the implicit-shift QL iteration (the EISPACK `tred2`/`tql2` pair).
//! `generalized_sym_eig` handles `S x = λ N x` with `N` SPD through the Cholesky
//! reduction `L⁻¹ S L⁻ᵀ`. `jacobi_eig3` is a cyclic Jacobi sweep for 3×3 tensors.

use super::{DenseMatrix, LinalgError, DENSE_LIMIT};
use crate::scalar::Real;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    pub values: Vec<T>,
    /// Eigenvectors stored as columns.
    pub vectors: DenseMatrix<T>,
}

pub fn sym_eig<T: Real>(s: &DenseMatrix<T>) -> Result<SymEig<T>, LinalgError> {
    if s.nrows() != s.ncols() {
        return Err(LinalgError::NotSquare(s.nrows(), s.ncols()));
    }
    let n = s.nrows();
    if n > DENSE_LIMIT {
        return Err(LinalgError::TooLarge(n));
    }
    if n == 0 {
        return Ok(SymEig {
            values: vec![],
            vectors: DenseMatrix::zeros(0, 0),
        });
    }
    // symmetrize against round-off in the input
    let mut v: Vec<T> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (s[(i, j)] + s[(j, i)]) * T::of(0.5)
        })
        .collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(SymEig { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn sym_eigvals<T: Real>(s: &DenseMatrix<T>) -> Result<Vec<T>, LinalgError> {
    Ok(sym_eig(s)?.values)
}

/// `S x = λ N x` with eigenvectors normalized so that `Uᵀ N U = I`.
pub fn generalized_sym_eig<T: Real>(
    s: &DenseMatrix<T>,
    n_mat: &DenseMatrix<T>,
) -> Result<SymEig<T>, LinalgError> {
    let n = s.nrows();
    if s.ncols() != n || n_mat.nrows() != n || n_mat.ncols() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: (n, n),
            found: (n_mat.nrows(), n_mat.ncols()),
        });
    }
    if n > DENSE_LIMIT {
        return Err(LinalgError::TooLarge(n));
    }
    let chol = n_mat.cholesky()?;
    // C = L⁻¹ S L⁻ᵀ, built column by column: first X = L⁻¹ S, then C = L⁻¹ Xᵀ
    let mut x = DenseMatrix::zeros(n, n);
    for c in 0..n {
        x.set_column(c, &chol.forward(&s.column(c)));
    }
    let xt = x.transpose();
    let mut c_mat = DenseMatrix::zeros(n, n);
    for c in 0..n {
        c_mat.set_column(c, &chol.forward(&xt.column(c)));
    }
    let eig = sym_eig(&c_mat)?;
    let mut u = DenseMatrix::zeros(n, n);
    for c in 0..n {
        u.set_column(c, &chol.backward(&eig.vectors.column(c)));
    }
    Ok(SymEig {
        values: eig.values,
        vectors: u,
    })
}

pub fn generalized_sym_eigvals<T: Real>(
    s: &DenseMatrix<T>,
    n_mat: &DenseMatrix<T>,
) -> Result<Vec<T>, LinalgError> {
    Ok(generalized_sym_eig(s, n_mat)?.values)
}

/// Householder tridiagonalization; `v` holds the matrix on entry and the
/// accumulated transformation on exit.
fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let idx = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
                v[idx(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = T::zero();
    }
    v[idx(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit QL on the tridiagonal `(d, e)`, accumulating rotations into `v`.
fn tql2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<(), LinalgError> {
    let idx = |r: usize, c: usize| r * n + c;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let max_iter = 60 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(LinalgError::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::of(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[idx(k, i + 1)];
                        v[idx(k, i + 1)] = s * v[idx(k, i)] + c * hk;
                        v[idx(k, i)] = c * v[idx(k, i)] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order and `vectors[k]` belongs to
/// `values[k]`. Each eigenvector has its largest-magnitude component positive.
pub fn jacobi_eig3<T: Real>(m: [[T; 3]; 3]) -> ([T; 3], [[T; 3]; 3]) {
    let mut a = m;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = (a[i][j] + a[j][i]) * T::of(0.5);
            a[i][j] = avg;
            a[j][i] = avg;
        }
    }
    // v[r][c]: column c is an eigenvector
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let scale = a.iter().flatten().fold(T::zero(), |s, &x| s.max(x.abs()));
    let tol = T::of(1e-14) * scale.max(T::min_positive_value());
    for _sweep in 0..100 {
        let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off <= tol {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::of(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        a[j][j]
            .partial_cmp(&a[i][i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut values = [T::zero(); 3];
    let mut vectors = [[T::zero(); 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a[k][k];
        let mut col = [v[0][k], v[1][k], v[2][k]];
        // first index of largest magnitude
        let mut big = 0;
        for i in 1..3 {
            if col[i].abs() > col[big].abs() {
                big = i;
            }
        }
        if col[big] < T::zero() {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        vectors[slot] = col;
    }
    (values, vectors)
}
