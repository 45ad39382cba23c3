//! Brute-force curvature of the full collar metric `γ_ij dx^i dx^j + dt²`.
//!
//! Christoffel symbols come from centered differences of the sampled metric
//! components and the Ricci tensor from centered differences of those, with
//! no use of the slice-based identities in [`crate::collar`]. Everything is
//! second order. The round sphere is handled through a synthetic polar
//! coordinate `θ` around `θ₀ = 1` with metric `q(t)(dθ² + sin²θ dϕ²) + dt²`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::collar::MetricPath;
use crate::corner::Side;
use crate::linalg::{det2, inv3, Mat3};
use crate::slice::SliceKind;
use crate::stencil::d1_onesided2;
use crate::{Error, Result};

const THETA0: f64 = 1.0;

/// Scalar curvature and normal Ricci curvature of one slice node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleNode {
    pub scalar: f64,
    pub normal_ricci: f64,
}

struct Sampler<'a> {
    path: &'a MetricPath,
    /// Spacing along the two slice directions.
    hx: f64,
    ht: f64,
}

type Christoffel = [[[f64; 3]; 3]; 3];

impl Sampler<'_> {
    fn new(path: &MetricPath) -> Result<Sampler<'_>> {
        let ht = path.spacing();
        let hx = match path.kind {
            SliceKind::Sphere { ambient_dim: 3 } => ht,
            SliceKind::Sphere { .. } => {
                return Err(Error::InvalidConfig("the oracle handles three-dimensional collars only".into()))
            }
            SliceKind::Torus { n } => 2.0 * core::f64::consts::PI / n as f64,
        };
        Ok(Sampler { path, hx, ht })
    }

    /// Full metric at slice offset `(i, j)` from node and path index `k`.
    fn metric(&self, node: (usize, usize), di: isize, dj: isize, k: usize) -> Mat3 {
        let raw = self.path.raw(k);
        match self.path.kind {
            SliceKind::Sphere { .. } => {
                let q = raw[0];
                let th = THETA0 + di as f64 * self.hx;
                let s = th.sin();
                [[q, 0.0, 0.0], [0.0, q * s * s, 0.0], [0.0, 0.0, 1.0]]
            }
            SliceKind::Torus { n } => {
                let i = (node.0 as isize + di).rem_euclid(n as isize) as usize;
                let j = (node.1 as isize + dj).rem_euclid(n as isize) as usize;
                let p = 3 * (i + n * j);
                [[raw[p], raw[p + 1], 0.0], [raw[p + 1], raw[p + 2], 0.0], [0.0, 0.0, 1.0]]
            }
        }
    }

    fn dmetric(&self, node: (usize, usize), di: isize, dj: isize, k: usize) -> [Mat3; 3] {
        let mut out = [[[0.0; 3]; 3]; 3];
        let pairs = [
            (self.metric(node, di + 1, dj, k), self.metric(node, di - 1, dj, k), self.hx),
            (self.metric(node, di, dj + 1, k), self.metric(node, di, dj - 1, k), self.hx),
            (self.metric(node, di, dj, k + 1), self.metric(node, di, dj, k - 1), self.ht),
        ];
        for (e, (p, m, h)) in pairs.iter().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    out[e][a][b] = (p[a][b] - m[a][b]) / (2.0 * h);
                }
            }
        }
        out
    }

    /// `Γ^a_{bc}` at an offset point.
    fn christoffel(&self, node: (usize, usize), di: isize, dj: isize, k: usize) -> Result<Christoffel> {
        let g = self.metric(node, di, dj, k);
        let inv = inv3(&g).ok_or(Error::Inversion { node: k })?;
        let dg = self.dmetric(node, di, dj, k);
        let mut gam = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let mut s = 0.0;
                    for d in 0..3 {
                        s += inv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                    }
                    gam[a][b][c] = 0.5 * s;
                }
            }
        }
        Ok(gam)
    }

    fn node(&self, node: (usize, usize), k: usize) -> Result<OracleNode> {
        let g0 = self.christoffel(node, 0, 0, k)?;
        let plus = [
            self.christoffel(node, 1, 0, k)?,
            self.christoffel(node, 0, 1, k)?,
            self.christoffel(node, 0, 0, k + 1)?,
        ];
        let minus = [
            self.christoffel(node, -1, 0, k)?,
            self.christoffel(node, 0, -1, k)?,
            self.christoffel(node, 0, 0, k - 1)?,
        ];
        let hs = [self.hx, self.hx, self.ht];
        // dgam[e][a][b][c] = ∂_e Γ^a_bc
        let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
        for e in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        dgam[e][a][b][c] = (plus[e][a][b][c] - minus[e][a][b][c]) / (2.0 * hs[e]);
                    }
                }
            }
        }
        let mut ric = [[0.0; 3]; 3];
        for b in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    s += dgam[a][a][b][c] - dgam[c][a][b][a];
                    for d in 0..3 {
                        s += g0[a][a][d] * g0[d][b][c] - g0[a][c][d] * g0[d][a][b];
                    }
                }
                ric[b][c] = s;
            }
        }
        let inv = inv3(&self.metric(node, 0, 0, k)).ok_or(Error::Inversion { node: k })?;
        let mut scalar = 0.0;
        for b in 0..3 {
            for c in 0..3 {
                scalar += inv[b][c] * ric[b][c];
            }
        }
        Ok(OracleNode { scalar, normal_ricci: ric[2][2] })
    }
}

fn check_stencil(path: &MetricPath, k: usize) -> Result<()> {
    if k < 2 || k + 2 > path.n_t {
        return Err(Error::Stencil { index: k, reason: "oracle stencil leaves the grid" });
    }
    let c = path.corner_index();
    if k - 2 < c && k + 2 > c {
        return Err(Error::Stencil { index: k, reason: "oracle stencil crosses the corner" });
    }
    Ok(())
}

/// Oracle curvature at every `Σ` node of path index `k`.
pub fn fd_curvature_at(path: &MetricPath, k: usize) -> Result<Vec<OracleNode>> {
    check_stencil(path, k)?;
    let s = Sampler::new(path)?;
    match path.kind {
        SliceKind::Sphere { .. } => Ok(vec![s.node((0, 0), k)?]),
        SliceKind::Torus { n } => {
            let mut out = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    out.push(s.node((i, j), k)?);
                }
            }
            Ok(out)
        }
    }
}

/// Scalar curvature at path index `k`.
pub fn fd_scalar_curvature_at(path: &MetricPath, k: usize) -> Result<Vec<f64>> {
    Ok(fd_curvature_at(path, k)?.into_iter().map(|o| o.scalar).collect())
}

/// Scalar curvature at every path index whose stencil stays on one side of
/// the corner, as `(index, field)` pairs.
pub fn fd_scalar_curvature(path: &MetricPath) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::new();
    for k in 2..=path.n_t.saturating_sub(2) {
        match fd_scalar_curvature_at(path, k) {
            Ok(v) => out.push((k, v)),
            Err(Error::Stencil { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `Ric(ν, ν)` with `ν = ∂_t` at path index `k`.
pub fn fd_normal_ricci(path: &MetricPath, k: usize) -> Result<Vec<f64>> {
    Ok(fd_curvature_at(path, k)?.into_iter().map(|o| o.normal_ricci).collect())
}

/// `H = ∂_t log √det γ` at `t = 0` by a one-sided three-point difference.
pub fn fd_mean_curvature(path: &MetricPath, side: Side) -> Result<Vec<f64>> {
    let c = path.corner_index();
    let (step, h): (isize, f64) = match side {
        Side::Minus => (-1, -path.spacing()),
        Side::Plus => (1, path.spacing()),
    };
    let at = |j: isize| (c as isize + j * step) as usize;
    let log_vol = |k: usize| -> Result<Vec<f64>> {
        let raw = path.raw(k);
        match path.kind {
            SliceKind::Sphere { ambient_dim } => {
                if !(raw[0] > 0.0) {
                    return Err(Error::Inversion { node: k });
                }
                Ok(vec![0.5 * (ambient_dim - 1) as f64 * raw[0].ln()])
            }
            SliceKind::Torus { .. } => raw
                .chunks(3)
                .map(|s| {
                    let d = det2(&[s[0], s[1], s[2]]);
                    if d > 0.0 {
                        Ok(0.5 * d.ln())
                    } else {
                        Err(Error::Inversion { node: k })
                    }
                })
                .collect(),
        }
    };
    let (a, b, d) = (log_vol(at(0))?, log_vol(at(1))?, log_vol(at(2))?);
    Ok((0..a.len()).map(|i| d1_onesided2([a[i], b[i], d[i]], h)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::{build_collar, curvature_at};
    use crate::corner::{CornerMetric, SphericalCorner, TorusCorner};
    use crate::profile::RadialProfile;

    fn sphere_path(f: impl Fn(f64) -> f64, eps: f64, n_t: usize) -> MetricPath {
        let h = 4.0 * eps / n_t as f64;
        let c = n_t / 2;
        let v = (0..=n_t).map(|k| f(if k == c { 0.0 } else { -2.0 * eps + k as f64 * h }).powi(2)).collect();
        MetricPath::from_samples(SliceKind::Sphere { ambient_dim: 3 }, eps, n_t, v).unwrap()
    }

    #[test]
    fn flat_and_cylinder() {
        let worst = |n_t: usize| {
            let p = sphere_path(|t| 1.0 + t, 0.2, n_t);
            assert!(fd_scalar_curvature(&p).unwrap().iter().all(|(_, r)| r[0].abs() < 1e-2));
            fd_scalar_curvature_at(&p, n_t / 4).unwrap()[0].abs()
        };
        let (e1, e2) = (worst(40), worst(80));
        assert!(e2 < 2e-3 && e1 / e2 > 3.5, "{e1} {e2}");
        let p = sphere_path(|_| 2.0, 0.2, 40);
        for (_, r) in fd_scalar_curvature(&p).unwrap() {
            assert!((r[0] - 0.5).abs() < 1e-3, "{}", r[0]);
        }
    }

    #[test]
    fn round_sphere_normal_ricci() {
        // r = sin(s) around s = 1.2
        let p = sphere_path(|t| (1.2 + t).sin(), 0.1, 400);
        let k = 100;
        let o = fd_curvature_at(&p, k).unwrap()[0];
        assert!((o.normal_ricci - 2.0).abs() < 1e-5, "{}", o.normal_ricci);
        assert!((o.scalar - 6.0).abs() < 1e-5, "{}", o.scalar);
    }

    #[test]
    fn schwarzschild_normal_ricci_and_vacuum() {
        let corner = CornerMetric::Spherical(SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap());
        let p = build_collar(&corner, 1.0, 4000, 0).unwrap();
        // close to t = 0 on the plus side, away from the corner stencil
        let k = p.corner_index() + 2;
        let o = fd_curvature_at(&p, k).unwrap()[0];
        let r = p.raw(k)[0].sqrt();
        assert!((o.normal_ricci + 2.0 * 0.5 / r.powi(3)).abs() < 1e-6, "{}", o.normal_ricci);
        assert!(o.scalar.abs() < 1e-6);
        let h = fd_mean_curvature(&p, Side::Plus).unwrap()[0];
        assert!((h - 0.4330127018922193).abs() < 1e-5);
        let h = fd_mean_curvature(&p, Side::Minus).unwrap()[0];
        assert!((h - 0.5).abs() < 1e-5);
    }

    #[test]
    fn corner_crossing_stencil_is_rejected() {
        let p = sphere_path(|t| 1.0 + t.abs(), 0.2, 40);
        assert!(matches!(fd_scalar_curvature_at(&p, 21), Err(Error::Stencil { .. })));
        assert!(matches!(fd_scalar_curvature_at(&p, 1), Err(Error::Stencil { .. })));
        assert!(fd_scalar_curvature_at(&p, 22).is_ok());
        assert!(fd_scalar_curvature_at(&p, 18).is_ok());
        let c = fd_mean_curvature(&sphere_path(|_| 3.0, 0.2, 40), Side::Plus).unwrap();
        assert!(c[0].abs() < 1e-12);
        let u = fd_mean_curvature(&sphere_path(|t| 1.0 + t, 0.2, 40), Side::Plus).unwrap();
        assert!((u[0] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn unequal_dimension_is_rejected() {
        let corner = CornerMetric::Spherical(
            SphericalCorner::new(
                4,
                1.0,
                RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
                RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
            )
            .unwrap(),
        );
        let p = build_collar(&corner, 0.2, 40, 0).unwrap();
        assert!(fd_scalar_curvature_at(&p, 10).is_err());
    }

    #[test]
    fn torus_oracle_matches_collar_identity_at_second_order() {
        let err = |n: usize, n_t: usize| {
            let tc = TorusCorner::smooth(n);
            let p = build_collar(&CornerMetric::TorusCollar(tc), 0.2, n_t, n).unwrap();
            let k = n_t / 4;
            let a = fd_scalar_curvature_at(&p, k).unwrap();
            let b = curvature_at(&p, k, Side::Minus).unwrap().scalar;
            a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let (e1, e2) = (err(16, 40), err(32, 80));
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }
}
