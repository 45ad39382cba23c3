//! Slice tensors on `Σ` and the pointwise algebra of collar curvature.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{inv2, min_eig2, sandwich2, trace_prod2, Sym2};
use crate::stencil::{d1_central4, d2_central4};
use crate::{Error, Result};

/// Discretization of the hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SliceKind {
    /// Round `S^{n-1}` in an `n`-dimensional spherically symmetric metric.
    /// A slice tensor is one coefficient `q` multiplying the unit-sphere metric.
    Sphere { ambient_dim: usize },
    /// Flat periodic torus `[0, 2π)²` with an `n × n` grid; three components
    /// `[s11, s12, s22]` per node.
    Torus { n: usize },
}

impl SliceKind {
    pub fn components(&self) -> usize {
        match self {
            SliceKind::Sphere { .. } => 1,
            SliceKind::Torus { .. } => 3,
        }
    }

    pub fn nodes(&self) -> usize {
        match self {
            SliceKind::Sphere { .. } => 1,
            SliceKind::Torus { n } => n * n,
        }
    }

    /// Number of stored scalars per slice.
    pub fn width(&self) -> usize {
        self.components() * self.nodes()
    }

    pub fn torus_spacing(&self) -> Option<f64> {
        match self {
            SliceKind::Torus { n } => Some(2.0 * PI / *n as f64),
            _ => None,
        }
    }
}

/// Symmetric (0,2) tensor field on `Σ`. Symmetry holds by storage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceTensor {
    pub kind: SliceKind,
    pub data: Vec<f64>,
}

impl SliceTensor {
    pub fn new(kind: SliceKind, data: Vec<f64>) -> Result<Self> {
        if data.len() != kind.width() {
            return Err(Error::InvalidConfig("slice tensor length does not match its grid".into()));
        }
        Ok(SliceTensor { kind, data })
    }

    pub fn zeros(kind: SliceKind) -> Self {
        SliceTensor { kind, data: vec![0.0; kind.width()] }
    }

    /// Smallest eigenvalue over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        match self.kind {
            SliceKind::Sphere { .. } => self.data[0],
            SliceKind::Torus { .. } => self
                .data
                .chunks_exact(3)
                .map(|c| min_eig2(&[c[0], c[1], c[2]]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_metric(&self) -> bool {
        let m = self.min_eigenvalue();
        m > 0.0 && m.is_finite()
    }

    /// Max-abs difference over all nodes and components.
    pub fn sup_distance(&self, other: &SliceTensor) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Extrinsic quantities of one slice at one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeCurvature {
    /// Mean curvature `γ^{ij} A_ij`.
    pub mean: f64,
    /// `|A|² = γ^{ik} γ^{jl} A_ij A_kl`.
    pub a_squared: f64,
    /// `∂_t H`.
    pub mean_rate: f64,
    /// Intrinsic scalar curvature of the slice (`2K` for surfaces).
    pub slice_scalar: f64,
    /// Ambient scalar curvature `2K - |A|² - H² - 2 ∂_t H`.
    pub scalar: f64,
}

/// Assembles the collar curvature at one node from the slice metric and its
/// first two normal derivatives (all in the slice representation).
pub fn node_curvature(
    kind: SliceKind,
    g: &[f64],
    g1: &[f64],
    g2: &[f64],
    slice_scalar: f64,
    node: usize,
) -> Result<NodeCurvature> {
    let (mean, a_squared, mean_rate) = match kind {
        SliceKind::Sphere { ambient_dim } => {
            let k = (ambient_dim - 1) as f64;
            let (q, q1, q2) = (g[0], g1[0], g2[0]);
            if !(q > 0.0) {
                return Err(Error::Inversion { node });
            }
            let ratio = q1 / q;
            (0.5 * k * ratio, 0.25 * k * ratio * ratio, k * (0.5 * q2 / q - 0.5 * ratio * ratio))
        }
        SliceKind::Torus { .. } => {
            let gm: Sym2 = [g[0], g[1], g[2]];
            let d1: Sym2 = [g1[0], g1[1], g1[2]];
            let d2: Sym2 = [g2[0], g2[1], g2[2]];
            let inv = inv2(&gm).ok_or(Error::Inversion { node })?;
            let tr1 = trace_prod2(&inv, &d1);
            let x = trace_prod2(&sandwich2(&inv, &d1), &d1);
            let tr2 = trace_prod2(&inv, &d2);
            (0.5 * tr1, 0.25 * x, -0.5 * x + 0.5 * tr2)
        }
    };
    let scalar = slice_scalar - a_squared - mean * mean - 2.0 * mean_rate;
    Ok(NodeCurvature { mean, a_squared, mean_rate, slice_scalar, scalar })
}

/// Mean curvature `γ^{ij} A_ij` at every node given the slice metric and its
/// first normal derivative field.
pub fn mean_curvature_field(metric: &SliceTensor, d1: &SliceTensor) -> Result<Vec<f64>> {
    let kind = metric.kind;
    let nc = kind.components();
    (0..kind.nodes())
        .map(|i| {
            let g = &metric.data[i * nc..(i + 1) * nc];
            let a = &d1.data[i * nc..(i + 1) * nc];
            match kind {
                SliceKind::Sphere { ambient_dim } => {
                    if !(g[0] > 0.0) {
                        return Err(Error::Inversion { node: i });
                    }
                    Ok(0.5 * (ambient_dim - 1) as f64 * a[0] / g[0])
                }
                SliceKind::Torus { .. } => {
                    let inv = inv2(&[g[0], g[1], g[2]]).ok_or(Error::Inversion { node: i })?;
                    Ok(0.5 * trace_prod2(&inv, &[a[0], a[1], a[2]]))
                }
            }
        })
        .collect()
}

/// Intrinsic scalar curvature of each slice node (`2K` for surfaces).
///
/// Sphere: `(n-1)(n-2)/q`. Torus: Brioschi's formula with fourth-order
/// periodic differences.
pub fn slice_scalar_curvature(metric: &SliceTensor) -> Result<Vec<f64>> {
    match metric.kind {
        SliceKind::Sphere { ambient_dim } => {
            let q = metric.data[0];
            if !(q > 0.0) {
                return Err(Error::Inversion { node: 0 });
            }
            let k = (ambient_dim - 1) as f64;
            Ok(vec![k * (k - 1.0) / q])
        }
        SliceKind::Torus { n } => Ok(torus_gauss_curvature(n, &metric.data)?.into_iter().map(|k| 2.0 * k).collect()),
    }
}

/// Gaussian curvature of a metric `E du² + 2F du dv + G dv²` on the periodic
/// `n × n` grid (node index `i + n·j`, `u = x¹` along `i`).
pub fn torus_gauss_curvature(n: usize, data: &[f64]) -> Result<Vec<f64>> {
    if n < 5 {
        return Err(Error::Stencil { index: n, reason: "torus grid needs n >= 5" });
    }
    let h = 2.0 * PI / n as f64;
    let idx = |i: isize, j: isize| -> usize {
        let ii = i.rem_euclid(n as isize) as usize;
        let jj = j.rem_euclid(n as isize) as usize;
        ii + n * jj
    };
    let comp = |c: usize, i: isize, j: isize| data[3 * idx(i, j) + c];
    let du = |c: usize, i: isize, j: isize| {
        d1_central4([comp(c, i - 2, j), comp(c, i - 1, j), comp(c, i, j), comp(c, i + 1, j), comp(c, i + 2, j)], h)
    };
    let dv = |c: usize, i: isize, j: isize| {
        d1_central4([comp(c, i, j - 2), comp(c, i, j - 1), comp(c, i, j), comp(c, i, j + 1), comp(c, i, j + 2)], h)
    };
    let duu = |c: usize, i: isize, j: isize| {
        d2_central4([comp(c, i - 2, j), comp(c, i - 1, j), comp(c, i, j), comp(c, i + 1, j), comp(c, i + 2, j)], h)
    };
    let dvv = |c: usize, i: isize, j: isize| {
        d2_central4([comp(c, i, j - 2), comp(c, i, j - 1), comp(c, i, j), comp(c, i, j + 1), comp(c, i, j + 2)], h)
    };
    let duv = |c: usize, i: isize, j: isize| {
        d1_central4([dv(c, i - 2, j), dv(c, i - 1, j), dv(c, i, j), dv(c, i + 1, j), dv(c, i + 2, j)], h)
    };
    let mut out = vec![0.0; n * n];
    for j in 0..n as isize {
        for i in 0..n as isize {
            let (e, f, g) = (comp(0, i, j), comp(1, i, j), comp(2, i, j));
            let (eu, ev) = (du(0, i, j), dv(0, i, j));
            let (fu, fv) = (du(1, i, j), dv(1, i, j));
            let (gu, gv) = (du(2, i, j), dv(2, i, j));
            let (evv, fuv, guu) = (dvv(0, i, j), duv(1, i, j), duu(2, i, j));
            let m1 = [
                [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
                [fv - 0.5 * gu, e, f],
                [0.5 * gv, f, g],
            ];
            let m2 = [[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, g]];
            let det = e * g - f * f;
            if !(det > 0.0) {
                return Err(Error::Inversion { node: idx(i, j) });
            }
            out[idx(i, j)] = (det3(&m1) - det3(&m2)) / (det * det);
        }
    }
    Ok(out)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conformal_torus(n: usize, amp: f64) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        let mut d = vec![0.0; 3 * n * n];
        for j in 0..n {
            for i in 0..n {
                let x = i as f64 * h;
                let e = (2.0 * amp * x.cos()).exp();
                let k = 3 * (i + n * j);
                d[k] = e;
                d[k + 2] = e;
            }
        }
        d
    }

    #[test]
    fn flat_torus_has_zero_curvature() {
        let n = 8;
        let mut d = vec![0.0; 3 * n * n];
        for c in d.chunks_exact_mut(3) {
            c[0] = 2.0;
            c[1] = 0.3;
            c[2] = 1.5;
        }
        let k = torus_gauss_curvature(n, &d).unwrap();
        assert!(k.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn conformal_torus_matches_closed_form_with_fourth_order() {
        // K = -e^{-2φ} Δφ with φ = 0.1 cos x¹  →  K = 0.1 cos x¹ e^{-0.2 cos x¹}
        let exact = |x: f64| 0.1 * x.cos() * (-0.2 * x.cos()).exp();
        let err = |n: usize| {
            let k = torus_gauss_curvature(n, &conformal_torus(n, 0.1)).unwrap();
            let h = 2.0 * PI / n as f64;
            (0..n).map(|i| (k[i] - exact(i as f64 * h)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e2 < 1e-5, "{e2}");
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn sphere_node_curvature_reduction() {
        // r(t) = 1 + t at t = 0 in flat space: q = 1, q' = 2, q'' = 2
        let kind = SliceKind::Sphere { ambient_dim: 3 };
        let c = node_curvature(kind, &[1.0], &[2.0], &[2.0], 2.0, 0).unwrap();
        assert!((c.mean - 2.0).abs() < 1e-15);
        assert!((c.a_squared - 2.0).abs() < 1e-15);
        assert!(c.scalar.abs() < 1e-15);
    }

    #[test]
    fn torus_node_algebra_agrees_with_sphere_formula_on_isotropic_slices() {
        // γ = q δ on a surface behaves like the n = 3 sphere reduction apart from 2K.
        let (q, q1, q2) = (2.3, 0.7, -0.4);
        let s = node_curvature(SliceKind::Sphere { ambient_dim: 3 }, &[q], &[q1], &[q2], 0.0, 0).unwrap();
        let t = node_curvature(SliceKind::Torus { n: 8 }, &[q, 0.0, q], &[q1, 0.0, q1], &[q2, 0.0, q2], 0.0, 0).unwrap();
        assert!((s.mean - t.mean).abs() < 1e-14);
        assert!((s.a_squared - t.a_squared).abs() < 1e-14);
        assert!((s.mean_rate - t.mean_rate).abs() < 1e-14);
    }
}
