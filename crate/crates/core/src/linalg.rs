//! Small dense helpers: 2×2 / 3×3 symmetric inverses and a tridiagonal solver.

use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

/// Symmetric 2×2 stored as `[s11, s12, s22]`.
pub type Sym2 = [f64; 3];

pub fn det2(s: &Sym2) -> f64 {
    s[0] * s[2] - s[1] * s[1]
}

pub fn inv2(s: &Sym2) -> Option<Sym2> {
    let d = det2(s);
    if !(d.abs() > 0.0) || !d.is_finite() {
        return None;
    }
    Some([s[2] / d, -s[1] / d, s[0] / d])
}

/// Smallest eigenvalue of a symmetric 2×2.
pub fn min_eig2(s: &Sym2) -> f64 {
    let m = 0.5 * (s[0] + s[2]);
    let r = (0.25 * (s[0] - s[2]) * (s[0] - s[2]) + s[1] * s[1]).sqrt();
    m - r
}

/// `tr(a b)` for symmetric 2×2 matrices.
pub fn trace_prod2(a: &Sym2, b: &Sym2) -> f64 {
    a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]
}

/// `a b a` for symmetric 2×2 (result is symmetric).
pub fn sandwich2(a: &Sym2, b: &Sym2) -> Sym2 {
    // (a b)
    let ab00 = a[0] * b[0] + a[1] * b[1];
    let ab01 = a[0] * b[1] + a[1] * b[2];
    let ab10 = a[1] * b[0] + a[2] * b[1];
    let ab11 = a[1] * b[1] + a[2] * b[2];
    [
        ab00 * a[0] + ab01 * a[1],
        ab00 * a[1] + ab01 * a[2],
        ab10 * a[1] + ab11 * a[2],
    ]
}

pub type Mat3 = [[f64; 3]; 3];

pub fn inv3(m: &Mat3) -> Option<Mat3> {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    let id = 1.0 / det;
    Some([
        [
            c00 * id,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * id,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * id,
        ],
        [
            c01 * id,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * id,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * id,
        ],
        [
            c02 * id,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * id,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * id,
        ],
    ])
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = alloc::vec![0.0; n];
    let mut d = alloc::vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return None;
    }
    c[0] = if n > 1 { upper[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [0.0, 1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let upper = [1.0, 0.3, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i] * x[i - 1];
                }
                if i < 3 {
                    v += upper[i] * x[i + 1];
                }
                v
            })
            .collect();
        let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for i in 0..4 {
            assert!((sol[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn inverse3_roundtrip() {
        let m = [[2.0, 0.1, 0.3], [0.1, 1.5, -0.2], [0.3, -0.2, 1.0]];
        let inv = inv3(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sandwich_matches_explicit() {
        let a = [1.3, 0.2, 0.7];
        let b = [0.4, -0.1, 2.0];
        let s = sandwich2(&a, &b);
        let full = |m: &Sym2| [[m[0], m[1]], [m[1], m[2]]];
        let (fa, fb) = (full(&a), full(&b));
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        r[i][j] += fa[i][k] * fb[k][l] * fa[l][j];
                    }
                }
            }
        }
        assert!((s[0] - r[0][0]).abs() < 1e-14);
        assert!((s[1] - r[0][1]).abs() < 1e-14);
        assert!((s[2] - r[1][1]).abs() < 1e-14);
    }
}
