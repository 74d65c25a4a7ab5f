//! Collapsed-coordinate Gauss rules on the reference triangle and tetrahedron.

use std::f64::consts::PI;

/// Points in barycentric coordinates, weights summing to the reference measure
/// (1/6 for the tetrahedron, 1/2 for the triangle).
#[derive(Debug, Clone)]
pub struct QuadratureRule<const N: usize> {
    pub points: Vec<[f64; N]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

pub type TetRule = QuadratureRule<4>;
pub type TriRule = QuadratureRule<3>;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Exact for polynomials of total degree `degree` on the reference tetrahedron.
pub fn tet_rule(degree: usize) -> TetRule {
    let (xu, wu) = gauss_legendre01((degree + 4) / 2);
    let (xv, wv) = gauss_legendre01((degree + 3) / 2);
    let (xw, ww) = gauss_legendre01((degree + 2) / 2);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (&u, &au) in xu.iter().zip(&wu) {
        for (&v, &av) in xv.iter().zip(&wv) {
            for (&s, &aw) in xw.iter().zip(&ww) {
                let x = u;
                let y = (1.0 - u) * v;
                let z = (1.0 - u) * (1.0 - v) * s;
                points.push([1.0 - x - y - z, x, y, z]);
                weights.push(au * av * aw * (1.0 - u) * (1.0 - u) * (1.0 - v));
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Exact for polynomials of total degree `degree` on the reference triangle.
pub fn tri_rule(degree: usize) -> TriRule {
    let (xu, wu) = gauss_legendre01((degree + 3) / 2);
    let (xv, wv) = gauss_legendre01((degree + 2) / 2);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (&u, &au) in xu.iter().zip(&wu) {
        for (&v, &av) in xv.iter().zip(&wv) {
            let x = u;
            let y = (1.0 - u) * v;
            points.push([1.0 - x - y, x, y]);
            weights.push(au * av * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}
