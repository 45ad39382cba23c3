//! Scalar curvature of the mollified collar: bounded part, Dirac-type
//! concentration in the inner band, and the distributional limit.

use alloc::vec;
use alloc::vec::Vec;

use crate::collar::{slice_curvature, MetricPath};
use crate::corner::Side;
use crate::extrapolate::{extrapolate_sweep, Extrapolation};
use crate::mollifier::{D2Regime, MollifiedPath, SidedSpline};
use crate::quadrature::AdaptiveRule;
use crate::slice::{mean_curvature_field, SliceTensor};
use crate::{Error, Result};

/// Mean curvature on both sides of `Σ` and the jump `H₋ - H₊`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanCurvatureJump {
    pub h_minus: Vec<f64>,
    pub h_plus: Vec<f64>,
    pub jump: Vec<f64>,
    /// `jump ≥ -tol` at every node.
    pub holds_everywhere: bool,
    /// `jump > tol` at some node.
    pub strict_somewhere: bool,
    /// `jump < -tol` at some node.
    pub violated_somewhere: bool,
    pub tol: f64,
}

/// One-sided mean curvatures at `t = 0`, from the end slopes of the per-side
/// interpolants (fourth-order one-sided differences).
pub fn mean_curvature_jump(path: &MetricPath, tol: f64) -> Result<MeanCurvatureJump> {
    let spline = SidedSpline::new(path)?;
    jump_from_spline(path, &spline, tol)
}

fn jump_from_spline(path: &MetricPath, spline: &SidedSpline, tol: f64) -> Result<MeanCurvatureJump> {
    let metric = path.slice(path.corner_index());
    let w = path.width();
    let mut h = [Vec::new(), Vec::new()];
    for (i, side) in [Side::Minus, Side::Plus].into_iter().enumerate() {
        let mut d = vec![0.0; w];
        spline.side(side).d1_into(0.0, &mut d);
        h[i] = mean_curvature_field(&metric, &SliceTensor { kind: path.kind, data: d })?;
    }
    let [h_minus, h_plus] = h;
    let jump: Vec<f64> = h_minus.iter().zip(&h_plus).map(|(a, b)| a - b).collect();
    Ok(MeanCurvatureJump {
        holds_everywhere: jump.iter().all(|&j| j >= -tol),
        strict_somewhere: jump.iter().any(|&j| j > tol),
        violated_somewhere: jump.iter().any(|&j| j < -tol),
        h_minus,
        h_plus,
        jump,
        tol,
    })
}

/// Scalar curvature measurements of one mollified path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationReport {
    pub delta: f64,
    /// `sup |R_δ|` over refined nodes with `w < |t| ≤ δ/2`.
    pub band_sup_outer: f64,
    /// `sup |R_δ - 2 (H₋ - H₊) φ_w(t)|` over refined nodes with `|t| ≤ w`.
    pub band_sup_inner_residual: f64,
    /// `sup |R_δ|` over the whole band `|t| ≤ δ/2`.
    pub band_sup_total: f64,
    /// `min R_δ` over `|t| ≤ w/2`, per `Σ` node.
    pub inner_core_min: Vec<f64>,
    /// `∫_{-δ/2}^{δ/2} R_δ dt`, per `Σ` node.
    pub line_integrals: Vec<f64>,
    pub line_integral_error: f64,
    pub h_jump: Vec<f64>,
}

impl ConcentrationReport {
    pub fn min_line_integral(&self) -> f64 {
        self.line_integrals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_line_integral(&self) -> f64 {
        self.line_integrals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_h_jump(&self) -> f64 {
        self.h_jump.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_h_jump(&self) -> f64 {
        self.h_jump.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `R_δ` per `Σ` node at an arbitrary `t`.
pub fn mollified_scalar_at(m: &MollifiedPath, t: f64) -> Result<Vec<f64>> {
    let j = m.jet_at(t, D2Regime::Auto)?;
    Ok(slice_curvature(m.kind(), &j.value, &j.d1, &j.d2)?.into_iter().map(|c| c.scalar).collect())
}

/// `R_δ` per `Σ` node at refined node `k`.
pub fn mollified_scalar_at_node(m: &MollifiedPath, k: usize) -> Result<Vec<f64>> {
    let nodes = slice_curvature(m.kind(), m.gamma_at_node(k), m.d1_at_node(k), m.d2_at_node(k))?;
    Ok(nodes.into_iter().map(|c| c.scalar).collect())
}

/// The mean-curvature jump the mollified path actually smooths.
pub fn mollified_jump(m: &MollifiedPath) -> Result<MeanCurvatureJump> {
    jump_from_spline(&m.base, m.spline(), 1e-9)
}

/// Builds the concentration report. `line_tol` is the absolute error target
/// for the band integrals.
pub fn concentration_profile(m: &MollifiedPath, line_tol: f64) -> Result<ConcentrationReport> {
    let delta = m.delta();
    let w = m.inner_width();
    let jump = mollified_jump(m)?.jump;
    let nodes = m.kind().nodes();
    let kernel = *m.kernel();
    let mut outer: f64 = 0.0;
    let mut inner: f64 = 0.0;
    let mut total: f64 = 0.0;
    let mut core_min = vec![f64::INFINITY; nodes];
    for (k, &t) in m.s_grid.iter().enumerate() {
        if t.abs() > 0.5 * delta {
            continue;
        }
        let r = mollified_scalar_at_node(m, k)?;
        let dirac = kernel.scaled(t, w);
        for i in 0..nodes {
            total = total.max(r[i].abs());
            if t.abs() <= w {
                inner = inner.max((r[i] - 2.0 * jump[i] * dirac).abs());
                if t.abs() <= 0.5 * w {
                    core_min[i] = core_min[i].min(r[i]);
                }
            } else {
                outer = outer.max(r[i].abs());
            }
        }
    }
    let (line_integrals, line_integral_error) = band_integrals(m, line_tol)?;
    Ok(ConcentrationReport {
        delta,
        band_sup_outer: outer,
        band_sup_inner_residual: inner,
        band_sup_total: total,
        inner_core_min: core_min,
        line_integrals,
        line_integral_error,
        h_jump: jump,
    })
}

/// `∫ R_δ dt` over `[-δ/2, δ/2]` per `Σ` node, split at the regime boundaries.
pub fn band_integrals(m: &MollifiedPath, tol: f64) -> Result<(Vec<f64>, f64)> {
    let delta = m.delta();
    let w = m.inner_width();
    let nodes = m.kind().nodes();
    let rule = AdaptiveRule::default();
    let q = 0.25 * delta;
    let h = 0.5 * delta;
    let breaks = [-h, -q, -10.0 * w, -2.0 * w, -w, -0.5 * w, 0.0, 0.5 * w, w, 2.0 * w, 10.0 * w, q, h];
    let mut total = vec![0.0; nodes];
    let mut err = 0.0;
    let mut failure: Option<Error> = None;
    let per = tol / (breaks.len() - 1) as f64;
    for win in breaks.windows(2) {
        if !(win[1] > win[0]) {
            continue;
        }
        let r = rule.integrate_vec(win[0], win[1], nodes, per, |t, out| match mollified_scalar_at(m, t) {
            Ok(v) => out.copy_from_slice(&v),
            Err(e) => {
                failure.get_or_insert(e);
                out.iter_mut().for_each(|o| *o = 0.0);
            }
        })?;
        for i in 0..nodes {
            total[i] += r.value[i];
        }
        err += r.error;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((total, err))
}

/// Extrapolated `lim_{δ→0} ∫ R_δ dt` per `Σ` node.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistributionalLimit {
    pub deltas: Vec<f64>,
    pub limit: Vec<f64>,
    /// `2 (H₋ - H₊)` at the finest `δ`.
    pub expected: Vec<f64>,
    /// `max_δ max_x |∫R_δ - 2(H₋-H₊)| / δ`.
    pub rate_constant: f64,
    /// Nodes whose sweep was non-monotone; their limit is the finest raw value.
    pub flagged: Vec<usize>,
    pub fits: Vec<Extrapolation>,
}

impl DistributionalLimit {
    pub fn max_error(&self) -> f64 {
        self.limit.iter().zip(&self.expected).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Differences below this are treated as converged when fitting the sweep.
const FLAT_SWEEP: f64 = 1e-11;

/// Richardson extrapolation of the line integrals over a decreasing δ sweep.
pub fn distributional_scalar_curvature(reports: &[ConcentrationReport]) -> Result<DistributionalLimit> {
    if reports.len() < 2 {
        return Err(Error::Extrapolation("need at least two sweep members"));
    }
    let deltas: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    let nodes = reports[0].line_integrals.len();
    if reports.iter().any(|r| r.line_integrals.len() != nodes) {
        return Err(Error::Extrapolation("sweep members disagree on the Σ grid"));
    }
    let finest = &reports[reports.len() - 1];
    let expected: Vec<f64> = finest.h_jump.iter().map(|j| 2.0 * j).collect();
    let mut limit = Vec::with_capacity(nodes);
    let mut flagged = Vec::new();
    let mut fits = Vec::with_capacity(nodes);
    let mut rate: f64 = 0.0;
    for i in 0..nodes {
        let v: Vec<f64> = reports.iter().map(|r| r.line_integrals[i]).collect();
        for r in reports {
            rate = rate.max((r.line_integrals[i] - 2.0 * r.h_jump[i]).abs() / r.delta);
        }
        let spread = v.iter().fold(0.0f64, |m, x| m.max((x - v[v.len() - 1]).abs()));
        let fit = extrapolate_sweep(&deltas, &v, 1.0)?;
        if spread <= FLAT_SWEEP {
            limit.push(v[v.len() - 1]);
        } else if !fit.monotone {
            flagged.push(i);
            limit.push(v[v.len() - 1]);
        } else {
            limit.push(fit.limit);
        }
        fits.push(fit);
    }
    Ok(DistributionalLimit { deltas, limit, expected, rate_constant: rate, flagged, fits })
}

/// `min_x min_{|t| ≤ w/2} (R_δ - envelope)` over nodes with a positive jump;
/// `None` when no node has one.
pub fn sign_coherence(report: &ConcentrationReport, envelope: f64) -> Option<f64> {
    report
        .h_jump
        .iter()
        .zip(&report.inner_core_min)
        .filter(|(j, _)| **j > 0.0)
        .map(|(_, m)| m - envelope)
        .reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::build_collar;
    use crate::corner::{CornerMetric, SphericalCorner};
    use crate::mollifier::{mollify_path, MollifierConfig};

    fn schwarzschild(mass: f64) -> MetricPath {
        let corner = CornerMetric::Spherical(SphericalCorner::flat_in_schwarzschild(4.0, mass).unwrap());
        build_collar(&corner, 1.0, 2000, 0).unwrap()
    }

    #[test]
    fn jump_flags() {
        let r = mean_curvature_jump(&schwarzschild(0.5), 1e-9).unwrap();
        assert!((r.jump[0] - 0.066987298107781).abs() < 1e-9, "{}", r.jump[0]);
        assert!(r.holds_everywhere && r.strict_somewhere && !r.violated_somewhere);
        let r = mean_curvature_jump(&schwarzschild(-0.5), 1e-9).unwrap();
        assert!((r.jump[0] - (0.5 - 0.5 * 1.25f64.sqrt())).abs() < 1e-9);
        assert!(!r.holds_everywhere && r.violated_somewhere);
    }

    #[test]
    fn line_integral_tracks_twice_the_jump() {
        let path = schwarzschild(0.5);
        let m = mollify_path(&path, &MollifierConfig::new(0.05)).unwrap();
        let rep = concentration_profile(&m, 1e-9).unwrap();
        assert!((rep.line_integrals[0] - 2.0 * rep.h_jump[0]).abs() < 0.05 * 0.134);
        assert!(rep.inner_core_min[0] > 0.0);
        assert!(rep.band_sup_inner_residual.is_finite() && rep.band_sup_outer.is_finite());
    }

    #[test]
    fn exact_sweep_is_extrapolated() {
        let mk = |d: f64, v: f64| ConcentrationReport {
            delta: d,
            band_sup_outer: 0.0,
            band_sup_inner_residual: 0.0,
            band_sup_total: 0.0,
            inner_core_min: vec![0.0],
            line_integrals: vec![v],
            line_integral_error: 0.0,
            h_jump: vec![0.5],
        };
        let reps: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&d| mk(d, 1.0 + 0.3 * d)).collect();
        let l = distributional_scalar_curvature(&reps).unwrap();
        assert!((l.limit[0] - 1.0).abs() < 1e-12);
        assert!((l.rate_constant - 0.3).abs() < 1e-9);
        let reps: Vec<_> = [(0.1, 1.0), (0.05, 1.2), (0.025, 1.1)].iter().map(|&(d, v)| mk(d, v)).collect();
        let l = distributional_scalar_curvature(&reps).unwrap();
        assert_eq!(l.flagged, vec![0]);
        assert_eq!(l.limit[0], 1.1);
    }
}
