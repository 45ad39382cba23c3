//! Collar paths `t ↦ γ(t)` in Gaussian coordinates and their curvature.
//!
//! Normal derivatives use fourth-order centered differences where the stencil
//! stays on one side of the corner, second-order centered differences next to
//! it, and second-order one-sided differences at the corner node itself. The
//! corner node stores one slice metric but exposes a derivative set per side.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::corner::{CornerMetric, Side, SphericalCorner, TorusCorner};
use crate::slice::{node_curvature, slice_scalar_curvature, SliceKind, SliceTensor};
use crate::stencil::{d1_central2, d1_central4, d1_onesided2, d2_central2, d2_central4, d2_onesided2};
use crate::{Error, Result};

/// Relative tolerance on the induced-metric mismatch at `Σ`.
pub const MATCH_TOL: f64 = 1e-10;

/// Uniformly sampled collar path on `[-2ε, 2ε]` with a node at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricPath {
    pub kind: SliceKind,
    pub epsilon: f64,
    /// Number of intervals; the grid has `n_t + 1` nodes.
    pub n_t: usize,
    /// `values[k * width .. (k+1) * width]` is the slice at node `k`.
    pub values: Vec<f64>,
    /// Measured Lipschitz constant on `[-3ε/2, 3ε/2]` (max-abs norm).
    pub lipschitz_l: f64,
}

impl MetricPath {
    /// Builds a path from per-node slices; validates layout and positivity.
    pub fn from_samples(kind: SliceKind, epsilon: f64, n_t: usize, values: Vec<f64>) -> Result<Self> {
        if n_t < 8 || n_t % 2 != 0 {
            return Err(Error::InvalidConfig("n_t must be even and at least 8".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if values.len() != (n_t + 1) * kind.width() {
            return Err(Error::InvalidConfig("path sample count does not match the grid".into()));
        }
        let mut path = MetricPath { kind, epsilon, n_t, values, lipschitz_l: 0.0 };
        for k in 0..path.len() {
            if !path.slice(k).is_metric() {
                return Err(Error::Geometry(alloc::format!("slice at t = {} is not positive definite", path.t(k))));
            }
        }
        path.lipschitz_l = path.measure_lipschitz();
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.n_t + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> usize {
        self.kind.width()
    }

    pub fn spacing(&self) -> f64 {
        4.0 * self.epsilon / self.n_t as f64
    }

    pub fn corner_index(&self) -> usize {
        self.n_t / 2
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.corner_index() {
            0.0
        } else {
            -2.0 * self.epsilon + k as f64 * self.spacing()
        }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t(k)).collect()
    }

    pub fn raw(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.values[k * w..(k + 1) * w]
    }

    pub fn slice(&self, k: usize) -> SliceTensor {
        SliceTensor { kind: self.kind, data: self.raw(k).to_vec() }
    }

    /// Side a node belongs to; the corner node needs an explicit choice.
    pub fn side_of(&self, k: usize, side: Side) -> Side {
        let c = self.corner_index();
        match k.cmp(&c) {
            core::cmp::Ordering::Less => Side::Minus,
            core::cmp::Ordering::Greater => Side::Plus,
            core::cmp::Ordering::Equal => side,
        }
    }

    fn side_range(&self, side: Side) -> (usize, usize) {
        let c = self.corner_index();
        match side {
            Side::Minus => (0, c),
            Side::Plus => (c, self.n_t),
        }
    }

    fn measure_lipschitz(&self) -> f64 {
        let h = self.spacing();
        let lim = 1.5 * self.epsilon + 1e-12 * self.epsilon;
        let mut l = 0.0f64;
        for k in 0..self.n_t {
            if self.t(k).abs() > lim || self.t(k + 1).abs() > lim {
                continue;
            }
            let d = self.raw(k).iter().zip(self.raw(k + 1)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            l = l.max(d / h);
        }
        l
    }

    /// First and second normal derivative fields at node `k` on `side`.
    pub fn normal_derivatives(&self, k: usize, side: Side) -> Result<(Vec<f64>, Vec<f64>)> {
        if k >= self.len() {
            return Err(Error::Stencil { index: k, reason: "node outside the grid" });
        }
        let side = self.side_of(k, side);
        let (lo, hi) = self.side_range(side);
        let h = self.spacing();
        let w = self.width();
        let mut d1 = vec![0.0; w];
        let mut d2 = vec![0.0; w];
        let v = |j: usize, c: usize| self.values[j * w + c];
        if k >= lo + 2 && k + 2 <= hi {
            for c in 0..w {
                let f = [v(k - 2, c), v(k - 1, c), v(k, c), v(k + 1, c), v(k + 2, c)];
                d1[c] = d1_central4(f, h);
                d2[c] = d2_central4(f, h);
            }
        } else if k > lo && k < hi {
            for c in 0..w {
                let f = [v(k - 1, c), v(k, c), v(k + 1, c)];
                d1[c] = d1_central2(f, h);
                d2[c] = d2_central2(f, h);
            }
        } else if k == self.corner_index() {
            let (step, dir): (isize, f64) = match side {
                Side::Minus => (-1, -h),
                Side::Plus => (1, h),
            };
            let at = |j: isize| (k as isize + j * step) as usize;
            for c in 0..w {
                d1[c] = d1_onesided2([v(at(0), c), v(at(1), c), v(at(2), c)], dir);
                d2[c] = d2_onesided2([v(at(0), c), v(at(1), c), v(at(2), c), v(at(3), c)], dir);
            }
        } else {
            return Err(Error::Stencil { index: k, reason: "grid boundary has no stencil" });
        }
        Ok((d1, d2))
    }
}

/// Gaussian-collar path of a corner metric: `γ(t) = γ∓(t)` for `t ≶ 0`.
///
/// `sigma_grid` is the torus resolution and is ignored for spherical corners.
pub fn build_collar(corner: &CornerMetric, epsilon: f64, n_t: usize, sigma_grid: usize) -> Result<MetricPath> {
    if n_t < 8 || n_t % 2 != 0 {
        return Err(Error::InvalidConfig("n_t must be even and at least 8".into()));
    }
    let h = 4.0 * epsilon / n_t as f64;
    let c = n_t / 2;
    let t_of = |k: usize| if k == c { 0.0 } else { -2.0 * epsilon + k as f64 * h };
    match corner {
        CornerMetric::Spherical(sc) => {
            let kind = SliceKind::Sphere { ambient_dim: sc.ambient_dim };
            check_spherical_match(sc)?;
            if 2.0 * epsilon >= sc.corner_s {
                return Err(Error::InvalidConfig("collar reaches the inner end of the radial domain".into()));
            }
            let mut values = Vec::with_capacity(n_t + 1);
            for k in 0..=n_t {
                let side = if k <= c { Side::Minus } else { Side::Plus };
                let j = sc.side_jet(side, t_of(k))?;
                values.push(j.r * j.r);
            }
            MetricPath::from_samples(kind, epsilon, n_t, values)
        }
        CornerMetric::TorusCollar(tc) => {
            let tc = TorusCorner { n: sigma_grid, ..*tc };
            let kind = SliceKind::Torus { n: tc.n };
            let hx = 2.0 * PI / tc.n as f64;
            let mut mismatch = 0.0f64;
            let mut values = Vec::with_capacity((n_t + 1) * kind.width());
            for k in 0..=n_t {
                let side = if k <= c { Side::Minus } else { Side::Plus };
                for j in 0..tc.n {
                    for i in 0..tc.n {
                        let (x1, x2) = (i as f64 * hx, j as f64 * hx);
                        let (g, _, _) = tc.metric_jet(side, x1, x2, t_of(k));
                        if k == c {
                            let (gp, _, _) = tc.metric_jet(Side::Plus, x1, x2, 0.0);
                            for q in 0..3 {
                                mismatch = mismatch.max((g[q] - gp[q]).abs());
                            }
                        }
                        values.extend_from_slice(&g);
                    }
                }
            }
            if mismatch > MATCH_TOL {
                return Err(Error::CornerMismatch { max_diff: mismatch, tol: MATCH_TOL });
            }
            MetricPath::from_samples(kind, epsilon, n_t, values)
        }
    }
}

fn check_spherical_match(sc: &SphericalCorner) -> Result<()> {
    let rm = sc.side_jet(Side::Minus, 0.0)?.r;
    let rp = sc.side_jet(Side::Plus, 0.0)?.r;
    let diff = (rm * rm - rp * rp).abs();
    let tol = MATCH_TOL * rm.abs().max(rp.abs()).powi(2).max(1.0);
    if diff > tol {
        return Err(Error::CornerMismatch { max_diff: diff, tol });
    }
    Ok(())
}

/// `A_ij = ½ ∂_t γ_ij` at node `k`.
pub fn second_fundamental_form(path: &MetricPath, k: usize, side: Side) -> Result<SliceTensor> {
    let (d1, _) = path.normal_derivatives(k, side)?;
    Ok(SliceTensor { kind: path.kind, data: d1.into_iter().map(|v| 0.5 * v).collect() })
}

/// `H = γ^{ij} A_ij` at node `k`.
pub fn mean_curvature(path: &MetricPath, k: usize, side: Side) -> Result<Vec<f64>> {
    let a = second_fundamental_form(path, k, side)?;
    let two_a = SliceTensor { kind: a.kind, data: a.data.iter().map(|v| 2.0 * v).collect() };
    crate::slice::mean_curvature_field(&path.slice(k), &two_a)
}

/// Gaussian curvature (`K = R_Σ/2`) of the slice at node `k`.
pub fn slice_intrinsic_curvature(path: &MetricPath, k: usize) -> Result<Vec<f64>> {
    Ok(slice_scalar_curvature(&path.slice(k))?.into_iter().map(|v| 0.5 * v).collect())
}

/// Curvature of one slice, per `Σ` node.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureSlice {
    pub index: usize,
    pub t: f64,
    pub side: Side,
    pub second_fundamental_form: SliceTensor,
    pub mean: Vec<f64>,
    pub gauss: Vec<f64>,
    pub a_squared: Vec<f64>,
    pub mean_rate: Vec<f64>,
    pub scalar: Vec<f64>,
}

/// All curvature fields along a path. The corner node appears twice, once
/// per side; the two grid-end nodes are omitted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureField {
    pub slices: Vec<CurvatureSlice>,
}

impl CurvatureField {
    pub fn at(&self, index: usize, side: Side) -> Option<&CurvatureSlice> {
        self.slices.iter().find(|s| s.index == index && s.side == side)
    }
}

/// Curvature of one slice from its metric and normal derivatives.
pub fn slice_curvature(kind: SliceKind, g: &[f64], g1: &[f64], g2: &[f64]) -> Result<Vec<crate::slice::NodeCurvature>> {
    let metric = SliceTensor { kind, data: g.to_vec() };
    let scal = slice_scalar_curvature(&metric)?;
    let nc = kind.components();
    (0..kind.nodes())
        .map(|i| {
            let r = i * nc..(i + 1) * nc;
            node_curvature(kind, &g[r.clone()], &g1[r.clone()], &g2[r], scal[i], i)
        })
        .collect()
}

pub fn curvature_at(path: &MetricPath, k: usize, side: Side) -> Result<CurvatureSlice> {
    let side = path.side_of(k, side);
    let (d1, d2) = path.normal_derivatives(k, side)?;
    let nodes = slice_curvature(path.kind, path.raw(k), &d1, &d2)?;
    Ok(CurvatureSlice {
        index: k,
        t: path.t(k),
        side,
        second_fundamental_form: SliceTensor { kind: path.kind, data: d1.iter().map(|v| 0.5 * v).collect() },
        mean: nodes.iter().map(|c| c.mean).collect(),
        gauss: nodes.iter().map(|c| 0.5 * c.slice_scalar).collect(),
        a_squared: nodes.iter().map(|c| c.a_squared).collect(),
        mean_rate: nodes.iter().map(|c| c.mean_rate).collect(),
        scalar: nodes.iter().map(|c| c.scalar).collect(),
    })
}

/// Evaluates the collar curvature identity `R = 2K - |A|² - H² - 2∂_t H` at
/// every node with a valid stencil.
pub fn collar_scalar_curvature(path: &MetricPath) -> Result<CurvatureField> {
    let mut slices = Vec::with_capacity(path.len());
    for k in 1..path.n_t {
        if k == path.corner_index() {
            slices.push(curvature_at(path, k, Side::Minus)?);
            slices.push(curvature_at(path, k, Side::Plus)?);
        } else {
            slices.push(curvature_at(path, k, Side::Minus)?);
        }
    }
    Ok(CurvatureField { slices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialProfile;

    fn flat_unit_sphere() -> CornerMetric {
        CornerMetric::Spherical(
            SphericalCorner::new(
                3,
                1.0,
                RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
                RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
            )
            .unwrap(),
        )
    }

    #[test]
    fn flat_unit_sphere_path() {
        let path = build_collar(&flat_unit_sphere(), 0.2, 40, 0).unwrap();
        let c = path.corner_index();
        for k in 0..path.len() {
            let t = path.t(k);
            assert!((path.raw(k)[0] - (1.0 + t) * (1.0 + t)).abs() < 1e-14);
        }
        for side in [Side::Minus, Side::Plus] {
            let a = second_fundamental_form(&path, c, side).unwrap();
            assert!((a.data[0] - 1.0).abs() < 1e-12);
            let h = mean_curvature(&path, c, side).unwrap();
            assert!((h[0] - 2.0).abs() < 1e-12);
        }
        assert!((slice_intrinsic_curvature(&path, c).unwrap()[0] - 1.0).abs() < 1e-15);
        let field = collar_scalar_curvature(&path).unwrap();
        for s in &field.slices {
            assert!(s.scalar[0].abs() < 1e-10, "t={} R={}", s.t, s.scalar[0]);
        }
    }

    #[test]
    fn constant_path_has_no_extrinsic_curvature() {
        let kind = SliceKind::Sphere { ambient_dim: 3 };
        let r0: f64 = 3.0;
        let path = MetricPath::from_samples(kind, 0.5, 20, vec![r0 * r0; 21]).unwrap();
        for k in 1..20 {
            let s = curvature_at(&path, k, Side::Plus).unwrap();
            assert_eq!(s.second_fundamental_form.data[0], 0.0);
            assert_eq!(s.mean[0], 0.0);
            assert!((s.scalar[0] - 2.0 / (r0 * r0)).abs() < 1e-15);
        }
    }

    #[test]
    fn schwarzschild_side_quantities() {
        let corner = CornerMetric::Spherical(SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap());
        let path = build_collar(&corner, 1.0, 4000, 0).unwrap();
        let c = path.corner_index();
        let a = second_fundamental_form(&path, c, Side::Plus).unwrap();
        assert!((a.data[0] - 4.0 * 0.75f64.sqrt()).abs() < 1e-5, "{}", a.data[0]);
        let h = mean_curvature(&path, c, Side::Plus).unwrap();
        assert!((h[0] - 0.4330127018922193).abs() < 1e-6);
        let hm = mean_curvature(&path, c, Side::Minus).unwrap();
        assert!((hm[0] - 0.5).abs() < 1e-10);
        assert!(path.lipschitz_l.is_finite() && path.lipschitz_l > 0.0);
        let field = collar_scalar_curvature(&path).unwrap();
        let worst = field.slices.iter().map(|s| s.scalar[0].abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "vacuum residual {worst}");
    }

    #[test]
    fn mismatched_induced_metrics_are_rejected() {
        let corner = CornerMetric::Spherical(
            SphericalCorner::new(
                3,
                4.0,
                RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
                RadialProfile::Schwarzschild { mass: 0.5, anchor_s: 4.0, anchor_r: 4.1 },
            )
            .unwrap(),
        );
        assert!(matches!(build_collar(&corner, 1.0, 100, 0), Err(Error::CornerMismatch { .. })));
    }

    #[test]
    fn grid_ends_have_no_stencil() {
        let path = build_collar(&flat_unit_sphere(), 0.2, 40, 0).unwrap();
        assert!(matches!(path.normal_derivatives(0, Side::Minus), Err(Error::Stencil { .. })));
        assert!(matches!(path.normal_derivatives(40, Side::Plus), Err(Error::Stencil { .. })));
    }

    #[test]
    fn spherical_reduction_closed_forms() {
        // r(t) = 2 + t + 0.3 t² + 0.1 t³ on both sides.
        let kind = SliceKind::Sphere { ambient_dim: 3 };
        let (eps, n_t) = (0.25, 200);
        let h = 4.0 * eps / n_t as f64;
        let r = |t: f64| 2.0 + t + 0.3 * t * t + 0.1 * t * t * t;
        let values: Vec<f64> = (0..=n_t).map(|k| r(-2.0 * eps + k as f64 * h).powi(2)).collect();
        let path = MetricPath::from_samples(kind, eps, n_t, values).unwrap();
        for k in [10, 50, 150, 190] {
            let t = path.t(k);
            let (rv, r1, r2) = (r(t), 1.0 + 0.6 * t + 0.3 * t * t, 0.6 + 0.6 * t);
            let s = curvature_at(&path, k, Side::Plus).unwrap();
            assert!((s.second_fundamental_form.data[0] - rv * r1).abs() < 1e-8);
            assert!((s.mean[0] - 2.0 * r1 / rv).abs() < 1e-8);
            assert!((s.a_squared[0] - 2.0 * (r1 / rv).powi(2)).abs() < 1e-8);
            assert!((s.gauss[0] - 1.0 / (rv * rv)).abs() < 1e-12);
            let rr = 2.0 * (1.0 - r1 * r1) / (rv * rv) - 4.0 * r2 / rv;
            assert!((s.scalar[0] - rr).abs() < 1e-7, "{} vs {rr}", s.scalar[0]);
        }
    }
}
