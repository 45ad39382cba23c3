//! Agreement between the slice identities and the brute-force oracle.
//!
//! At a handful of collar positions away from the corner the oracle's `R` and
//! `Ric(ν,ν)` are compared with the collar fields: `R` directly, the Gauss
//! equation `2K = R - 2Ric(ν,ν) + H² - |A|²` and the evolution equation
//! `∂_t H = -Ric(ν,ν) - |A|²`. Errors are relative to the curvature scale
//! `max(|K|, H², |A|², |R|)` of the sampled slices.

use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::collar::{build_collar, curvature_at, CurvatureSlice, MetricPath};
use crate::corner::{CornerMetric, Side};
use crate::extrapolate::fit_order;
use crate::oracle::{fd_curvature_at, OracleNode};
use crate::slice::SliceKind;
use crate::{Error, Result};

/// Collar positions sampled by default, as multiples of `ε`.
pub const SAMPLE_POSITIONS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityErrors {
    pub scalar: f64,
    pub gauss: f64,
    pub evolution: f64,
}

impl IdentityErrors {
    pub fn worst(&self) -> f64 {
        self.scalar.max(self.gauss).max(self.evolution)
    }

    fn scaled(self, s: f64) -> Self {
        IdentityErrors { scalar: self.scalar / s, gauss: self.gauss / s, evolution: self.evolution / s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleLevel {
    pub n_t: usize,
    pub sigma_grid: usize,
    /// Relative errors of the plain second-order oracle.
    pub errors: IdentityErrors,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleEquivalence {
    pub family: alloc::string::String,
    pub positions: Vec<f64>,
    pub scale: f64,
    pub levels: Vec<OracleLevel>,
    /// Fitted orders of the three error columns against the `t` spacing.
    pub orders: IdentityErrors,
    /// Relative errors at the finest level with the oracle values
    /// Richardson-extrapolated over all levels.
    pub extrapolated: Option<IdentityErrors>,
}

impl OracleEquivalence {
    /// The errors the tolerance applies to: extrapolated when available.
    pub fn finest(&self) -> IdentityErrors {
        self.extrapolated.unwrap_or_else(|| self.levels[self.levels.len() - 1].errors)
    }

    /// Whether every column either converges at `min_order` or sits at the
    /// roundoff floor `floor` on every level.
    pub fn order_ok(&self, min_order: f64, floor: f64) -> bool {
        let col = |f: fn(&IdentityErrors) -> f64, p: f64| {
            p >= min_order || self.levels.iter().all(|l| f(&l.errors) <= floor)
        };
        col(|e| e.scalar, self.orders.scalar)
            && col(|e| e.gauss, self.orders.gauss)
            && col(|e| e.evolution, self.orders.evolution)
    }
}

struct Sample {
    collar: CurvatureSlice,
    oracle: Vec<OracleNode>,
}

fn sample(path: &MetricPath, t: f64) -> Result<Sample> {
    let h = path.spacing();
    let k = ((t + 2.0 * path.epsilon) / h).round();
    if (k * h - 2.0 * path.epsilon - t).abs() > 1e-9 * h {
        return Err(Error::InvalidConfig("sample position is not a node of every level".into()));
    }
    let k = k as usize;
    let side = if t < 0.0 { Side::Minus } else { Side::Plus };
    Ok(Sample { collar: curvature_at(path, k, side)?, oracle: fd_curvature_at(path, k)? })
}

/// Stride that maps coarse `Σ` nodes onto a finer torus grid.
fn node_map(kind: SliceKind, coarse: usize) -> impl Fn(usize) -> usize {
    let (nf, stride) = match kind {
        SliceKind::Torus { n } => (n, n / coarse.max(1)),
        SliceKind::Sphere { .. } => (1, 1),
    };
    move |i| {
        if nf == 1 {
            0
        } else {
            let (a, b) = (i % coarse, i / coarse);
            stride * a + nf * stride * b
        }
    }
}

fn errors_of(c: &CurvatureSlice, i: usize, r: f64, ric: f64) -> IdentityErrors {
    let rhs = r - 2.0 * ric + c.mean[i] * c.mean[i] - c.a_squared[i];
    IdentityErrors {
        scalar: (r - c.scalar[i]).abs(),
        gauss: (2.0 * c.gauss[i] - rhs).abs(),
        evolution: (c.mean_rate[i] + ric + c.a_squared[i]).abs(),
    }
}

fn max_errors(a: IdentityErrors, b: IdentityErrors) -> IdentityErrors {
    IdentityErrors {
        scalar: a.scalar.max(b.scalar),
        gauss: a.gauss.max(b.gauss),
        evolution: a.evolution.max(b.evolution),
    }
}

const ZERO: IdentityErrors = IdentityErrors { scalar: 0.0, gauss: 0.0, evolution: 0.0 };

/// Runs the comparison on `levels = [(n_t, sigma_grid), ...]`, each a
/// doubling of the previous one. `positions` are multiples of `ε`.
pub fn oracle_equivalence(
    corner: &CornerMetric,
    epsilon: f64,
    levels: &[(usize, usize)],
    positions: &[f64],
    extrapolate: bool,
) -> Result<OracleEquivalence> {
    if levels.len() < 2 {
        return Err(Error::InvalidConfig("oracle equivalence needs at least two levels".into()));
    }
    if levels.windows(2).any(|w| w[1].0 != 2 * w[0].0) {
        return Err(Error::InvalidConfig("oracle levels must double n_t".into()));
    }
    let torus = matches!(corner, CornerMetric::TorusCollar(_));
    if torus && levels.windows(2).any(|w| w[1].1 != 2 * w[0].1) {
        return Err(Error::InvalidConfig("oracle levels must double the torus grid".into()));
    }
    if extrapolate && !(2..=3).contains(&levels.len()) {
        return Err(Error::InvalidConfig("oracle extrapolation uses two or three levels".into()));
    }
    let mut samples: Vec<Vec<Sample>> = Vec::with_capacity(levels.len());
    let mut kinds = Vec::with_capacity(levels.len());
    for &(n_t, sg) in levels {
        let path = build_collar(corner, epsilon, n_t, sg)?;
        kinds.push(path.kind);
        samples.push(positions.iter().map(|&p| sample(&path, p * epsilon)).collect::<Result<_>>()?);
    }
    let coarse = match kinds[0] {
        SliceKind::Torus { n } => n,
        SliceKind::Sphere { .. } => 1,
    };
    let nodes = coarse * coarse;
    let finest = samples.len() - 1;
    let mut scale: f64 = 0.0;
    for s in &samples[finest] {
        let c = &s.collar;
        for i in 0..c.scalar.len() {
            let m2 = c.mean[i] * c.mean[i];
            scale = scale.max(c.gauss[i].abs()).max(m2).max(c.a_squared[i]).max(c.scalar[i].abs());
        }
    }
    if !(scale > 0.0) {
        scale = 1.0;
    }
    let mut out_levels = Vec::with_capacity(levels.len());
    for (l, &(n_t, sigma_grid)) in levels.iter().enumerate() {
        let map = node_map(kinds[l], coarse);
        let mut e = ZERO;
        for s in &samples[l] {
            for i in 0..nodes {
                let j = map(i);
                e = max_errors(e, errors_of(&s.collar, j, s.oracle[j].scalar, s.oracle[j].normal_ricci));
            }
        }
        out_levels.push(OracleLevel { n_t, sigma_grid, errors: e.scaled(scale) });
    }
    let h: Vec<f64> = levels.iter().map(|l| 4.0 * epsilon / l.0 as f64).collect();
    let fit = |f: fn(&IdentityErrors) -> f64| {
        let e: Vec<f64> = out_levels.iter().map(|l| f(&l.errors)).collect();
        fit_order(&h, &e).unwrap_or(0.0)
    };
    let orders = IdentityErrors { scalar: fit(|e| e.scalar), gauss: fit(|e| e.gauss), evolution: fit(|e| e.evolution) };
    let extrapolated = if extrapolate {
        let weights: &[f64] = if levels.len() == 3 { &[1.0, -20.0, 64.0] } else { &[-1.0, 4.0] };
        let norm: f64 = weights.iter().sum();
        let maps: Vec<_> = kinds.iter().map(|&k| node_map(k, coarse)).collect();
        let mut e = ZERO;
        for p in 0..positions.len() {
            for i in 0..nodes {
                let mut r = 0.0;
                let mut ric = 0.0;
                for (l, w) in weights.iter().enumerate() {
                    let o = samples[l][p].oracle[maps[l](i)];
                    r += w * o.scalar;
                    ric += w * o.normal_ricci;
                }
                let j = maps[finest](i);
                e = max_errors(e, errors_of(&samples[finest][p].collar, j, r / norm, ric / norm));
            }
        }
        Some(e.scaled(scale))
    } else {
        None
    };
    Ok(OracleEquivalence {
        family: corner.family_name().into(),
        positions: positions.to_vec(),
        scale,
        levels: out_levels,
        orders,
        extrapolated,
    })
}
