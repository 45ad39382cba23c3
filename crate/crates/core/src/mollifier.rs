//! Variable-bandwidth mollification of a collar path.
//!
//! `γ_δ(s) = ∫ γ(s - σ_δ(s) u) φ(u) du` with `σ_δ(s) = δ² σ(s/δ)`. The base
//! path is interpolated by one clamped cubic spline per side, so the kink at
//! `t = 0` survives interpolation and is only removed by the convolution.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::collar::MetricPath;
use crate::corner::Side;
use crate::kernel::{Bandwidth, Cutoff, Mollifier, PLATEAU};
use crate::linalg::min_eig2;
use crate::quadrature::{AdaptiveRule, GaussLegendre};
use crate::slice::{SliceKind, SliceTensor};
use crate::spline::UniformSpline;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct MollifierConfig {
    pub delta: f64,
    /// Plateau height of the cutoff; `1/100` unless overridden.
    pub plateau: f64,
    /// Absolute error target per component for the convolution integrals.
    pub quadrature_tol: f64,
    /// Uniform refined intervals across `[0, 2w]` on each side, `w = plateau · δ²`.
    pub refined_band_nodes: usize,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        MollifierConfig { delta: 0.05, plateau: PLATEAU, quadrature_tol: 1e-10, refined_band_nodes: 80 }
    }
}

impl MollifierConfig {
    pub fn new(delta: f64) -> Self {
        MollifierConfig { delta, ..Default::default() }
    }

    pub fn bandwidth(&self) -> Bandwidth {
        Bandwidth::new(self.delta, Cutoff { plateau: self.plateau })
    }

    /// Half-width of the constant-bandwidth inner band.
    pub fn inner_width(&self) -> f64 {
        self.bandwidth().inner_width()
    }

    pub fn validate(&self, epsilon: f64) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if self.delta > epsilon / 10.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(alloc::format!(
                "delta = {} exceeds epsilon/10 = {}",
                self.delta,
                epsilon / 10.0
            )));
        }
        if !(self.plateau > 0.0 && self.plateau <= PLATEAU) {
            return Err(Error::InvalidConfig("plateau must lie in (0, 1/100]".into()));
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(Error::InvalidConfig("quadrature_tol must be positive".into()));
        }
        if self.refined_band_nodes < 20 {
            return Err(Error::InvalidConfig("refined_band_nodes must be at least 20".into()));
        }
        Ok(())
    }
}

/// `σ_δ(t) = δ² σ(t/δ)`.
pub fn sigma_delta(config: &MollifierConfig, t: f64) -> f64 {
    config.bandwidth().eval(t)
}

/// Per-side cubic interpolation of a [`MetricPath`].
#[derive(Debug, Clone)]
pub struct SidedSpline {
    minus: UniformSpline,
    plus: UniformSpline,
}

impl SidedSpline {
    pub fn new(path: &MetricPath) -> Result<Self> {
        let c = path.corner_index();
        let w = path.width();
        let h = path.spacing();
        let minus = UniformSpline::new(-2.0 * path.epsilon, h, w, path.values[..(c + 1) * w].to_vec())?;
        let plus = UniformSpline::new(0.0, h, w, path.values[c * w..].to_vec())?;
        Ok(SidedSpline { minus, plus })
    }

    pub fn side(&self, side: Side) -> &UniformSpline {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    fn at(&self, t: f64) -> &UniformSpline {
        if t < 0.0 {
            &self.minus
        } else {
            &self.plus
        }
    }

    pub fn value_into(&self, t: f64, out: &mut [f64]) {
        self.at(t).value_into(t, out)
    }

    pub fn d1_into(&self, t: f64, out: &mut [f64]) {
        self.at(t).d1_into(t, out)
    }

    pub fn d2_into(&self, t: f64, out: &mut [f64]) {
        self.at(t).d2_into(t, out)
    }

    pub fn jet_into(&self, t: f64, v: &mut [f64], d1: &mut [f64], d2: &mut [f64]) {
        self.at(t).jet_into(t, v, d1, d2)
    }
}

/// Which second-derivative formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D2Regime {
    /// Chain-rule formula, valid where the window does not reach `t = 0`.
    Outer,
    /// Constant-bandwidth formula with the explicit jump term, valid on the plateau.
    Inner,
    /// `Inner` for `|s| < w`, `Outer` otherwise.
    Auto,
}

/// The mollified path: evaluation engine plus samples on a refined grid.
#[derive(Debug, Clone)]
pub struct MollifiedPath {
    pub base: MetricPath,
    pub config: MollifierConfig,
    /// Refined grid covering `[-2ε, 2ε]`, dense in the band.
    pub s_grid: Vec<f64>,
    /// Slices of `γ_δ`, `s_grid.len() * width` values.
    pub gamma: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Largest self-estimated quadrature error over the refined grid.
    pub quadrature_error: f64,
    spline: SidedSpline,
    kernel: Mollifier,
    /// Panels on `[-1, 1]` that resolve `φ` against low-degree polynomials.
    plan: Vec<(f64, f64)>,
    fine: GaussLegendre,
    coarse: GaussLegendre,
    interp: GaussLegendre,
}

/// One convolution evaluation: value and both derivatives at a point.
#[derive(Debug, Clone)]
pub struct ConvolutionJet {
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub error: f64,
}

fn kernel_plan(kernel: &Mollifier, tol: f64) -> Result<Vec<(f64, f64)>> {
    let rule = AdaptiveRule::default();
    let mut panels = Vec::new();
    for (a, b) in [(-1.0, 0.0), (0.0, 1.0)] {
        let r = rule.integrate_vec(a, b, 6, tol, |u, out| {
            let w = kernel.eval(u);
            let mut p = 1.0;
            for o in out.iter_mut() {
                *o = w * p;
                p *= u;
            }
        })?;
        panels.extend(r.panels);
    }
    Ok(panels)
}

impl MollifiedPath {
    fn empty(base: &MetricPath, config: MollifierConfig) -> Result<Self> {
        config.validate(base.epsilon)?;
        let kernel = Mollifier::new();
        let plan = kernel_plan(&kernel, 1e-15)?;
        Ok(MollifiedPath {
            base: base.clone(),
            config,
            s_grid: Vec::new(),
            gamma: Vec::new(),
            d1: Vec::new(),
            d2: Vec::new(),
            quadrature_error: 0.0,
            spline: SidedSpline::new(base)?,
            kernel,
            plan,
            fine: GaussLegendre::new(20),
            coarse: GaussLegendre::new(10),
            interp: GaussLegendre::new(4),
        })
    }

    pub fn kind(&self) -> SliceKind {
        self.base.kind
    }

    pub fn width(&self) -> usize {
        self.base.width()
    }

    pub fn delta(&self) -> f64 {
        self.config.delta
    }

    pub fn inner_width(&self) -> f64 {
        self.config.inner_width()
    }

    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    pub fn spline(&self) -> &SidedSpline {
        &self.spline
    }

    pub fn kernel(&self) -> &Mollifier {
        &self.kernel
    }

    pub fn gamma_at_node(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.gamma[k * w..(k + 1) * w]
    }

    pub fn d1_at_node(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.d1[k * w..(k + 1) * w]
    }

    pub fn d2_at_node(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.d2[k * w..(k + 1) * w]
    }

    pub fn slice(&self, k: usize) -> SliceTensor {
        SliceTensor { kind: self.kind(), data: self.gamma_at_node(k).to_vec() }
    }

    /// Product-integration nodes `(u, fine weight, coarse weight)` for the
    /// window at `s`. Between consecutive corner and knot preimages the
    /// integrands are cubics in `u` times `φ`, so four nodes per piece with
    /// weights `∫ L_j φ` are exact; the weights themselves come from the fine
    /// and coarse Gauss rules over the kernel plan.
    fn window_nodes(&self, s: f64, sig: f64, out: &mut Vec<(f64, f64, f64)>) {
        out.clear();
        let mut breaks: Vec<f64> = vec![-1.0];
        let u_corner = s / sig;
        if u_corner.abs() < 1.0 {
            breaks.push(u_corner);
        }
        let mut knots = Vec::new();
        for side in [Side::Minus, Side::Plus] {
            self.spline.side(side).knots_between(s - sig, s + sig, &mut knots);
        }
        for t in knots {
            let u = (s - t) / sig;
            if u.abs() < 1.0 && u != u_corner {
                breaks.push(u);
            }
        }
        breaks.push(1.0);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        breaks.dedup();
        for piece in breaks.windows(2) {
            let (p, q) = (piece[0], piece[1]);
            let (c, h) = (0.5 * (p + q), 0.5 * (q - p));
            if h <= 0.0 {
                continue;
            }
            let x = &self.interp.nodes;
            let mut wf = [0.0; 4];
            let mut wc = [0.0; 4];
            for &(a, b) in &self.plan {
                let (lo, hi) = (a.max(p), b.min(q));
                if hi <= lo {
                    continue;
                }
                let (pc, ph) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                for (rule, acc) in [(&self.fine, &mut wf), (&self.coarse, &mut wc)] {
                    for (r, w) in rule.nodes.iter().zip(&rule.weights) {
                        let u = pc + ph * r;
                        let f = w * ph * self.kernel.eval(u);
                        let y = (u - c) / h;
                        for j in 0..4 {
                            let mut l = 1.0;
                            for k in 0..4 {
                                if k != j {
                                    l *= (y - x[k]) / (x[j] - x[k]);
                                }
                            }
                            acc[j] += f * l;
                        }
                    }
                }
            }
            for j in 0..4 {
                out.push((c + h * x[j], wf[j], wc[j]));
            }
        }
    }

    /// `γ_δ`, `∂γ_δ` and `∂²γ_δ` at an arbitrary `s` in the collar.
    pub fn jet_at(&self, s: f64, regime: D2Regime) -> Result<ConvolutionJet> {
        let w = self.width();
        let mut out = ConvolutionJet { value: vec![0.0; w], d1: vec![0.0; w], d2: vec![0.0; w], error: 0.0 };
        let bw = self.config.bandwidth();
        let (sig, sp, spp) = bw.jet(s);
        if sig == 0.0 {
            self.spline.value_into(s, &mut out.value);
            self.spline.d1_into(s, &mut out.d1);
            self.spline.d2_into(s, &mut out.d2);
            return Ok(out);
        }
        let reach = s.abs() + sig;
        if reach > 2.0 * self.base.epsilon {
            return Err(Error::Stencil { index: 0, reason: "mollifier window leaves the collar" });
        }
        let delta = self.config.delta;
        let inner_w = bw.inner_width();
        let regime = match regime {
            D2Regime::Auto => {
                if s.abs() < inner_w {
                    D2Regime::Inner
                } else {
                    D2Regime::Outer
                }
            }
            r => r,
        };
        if regime == D2Regime::Inner && s.abs() >= 0.25 * delta {
            return Err(Error::InvalidConfig("inner second-derivative formula needs |s| < delta/4".into()));
        }
        let mut nodes = Vec::new();
        self.window_nodes(s, sig, &mut nodes);
        let mut g = vec![0.0; w];
        let mut g1 = vec![0.0; w];
        let mut g2 = vec![0.0; w];
        let mut cv = vec![0.0; w];
        let mut c1 = vec![0.0; w];
        let mut c2 = vec![0.0; w];
        let ds = delta * sp;
        for &(u, wf, wc) in &nodes {
            let tau = s - sig * u;
            self.spline.jet_into(tau, &mut g, &mut g1, &mut g2);
            let chain = 1.0 - u * ds;
            for c in 0..w {
                let d2 = match regime {
                    D2Regime::Inner => g2[c],
                    _ => g2[c] * chain * chain - g1[c] * u * spp,
                };
                out.value[c] += wf * g[c];
                out.d1[c] += wf * g1[c] * chain;
                out.d2[c] += wf * d2;
                cv[c] += wc * g[c];
                c1[c] += wc * g1[c] * chain;
                c2[c] += wc * d2;
            }
        }
        if regime == D2Regime::Inner {
            let weight = self.kernel.scaled(s, inner_w);
            if weight != 0.0 {
                let mut jm = vec![0.0; w];
                let mut jp = vec![0.0; w];
                self.spline.side(Side::Minus).d1_into(0.0, &mut jm);
                self.spline.side(Side::Plus).d1_into(0.0, &mut jp);
                for c in 0..w {
                    let jump = (jp[c] - jm[c]) * weight;
                    out.d2[c] += jump;
                    c2[c] += jump;
                }
            }
        }
        let mut err = 0.0f64;
        for c in 0..w {
            err = err.max((out.value[c] - cv[c]).abs()).max((out.d1[c] - c1[c]).abs());
            // d2 is O(1/w) inside the band; hold it to the same relative accuracy.
            err = err.max((out.d2[c] - c2[c]).abs() * inner_w.min(1.0));
        }
        out.error = err;
        if err > self.config.quadrature_tol {
            return Err(Error::Quadrature { estimate: err, tol: self.config.quadrature_tol });
        }
        Ok(out)
    }

    pub fn value_at(&self, s: f64) -> Result<Vec<f64>> {
        Ok(self.jet_at(s, D2Regime::Auto)?.value)
    }
}

/// Positive half of the refined band grid, from 0 through `0.55 δ`.
fn band_half_grid(config: &MollifierConfig) -> Vec<f64> {
    let delta = config.delta;
    let w = config.inner_width();
    let m = config.refined_band_nodes;
    let h_in = 2.0 * w / m as f64;
    let h_out = delta / 200.0;
    let mut s: Vec<f64> = (0..=m).map(|k| k as f64 * h_in).collect();
    // s = 2w is the last uniform node
    let quarter = 0.25 * delta;
    let mut h = h_in;
    let mut x = 2.0 * w;
    loop {
        h = (h * 1.1).min(h_out);
        if x + 1.5 * h >= quarter {
            break;
        }
        x += h;
        s.push(x);
    }
    s.push(quarter);
    let n_mid = ((0.5 * delta - quarter) / h_out).ceil() as usize;
    for k in 1..=n_mid {
        s.push(quarter + (0.5 * delta - quarter) * k as f64 / n_mid as f64);
    }
    let n_tail = ((0.05 * delta) / h_out).ceil().max(1.0) as usize;
    for k in 1..=n_tail {
        s.push(0.5 * delta + 0.05 * delta * k as f64 / n_tail as f64);
    }
    // exact special points
    let m2 = m / 2;
    s[m2] = w;
    s
}

/// Mollifies `base` and samples the result on a refined grid.
pub fn mollify_path(base: &MetricPath, config: &MollifierConfig) -> Result<MollifiedPath> {
    let mut m = MollifiedPath::empty(base, *config)?;
    let half = band_half_grid(config);
    let edge = *half.last().unwrap_or(&0.0);
    let mut grid: Vec<f64> = Vec::new();
    // base nodes closer than this to the band edge would duplicate it
    let gap = 1e-9 * base.spacing();
    for k in 0..base.len() {
        let t = base.t(k);
        if t < -edge - gap {
            grid.push(t);
        }
    }
    grid.extend(half.iter().rev().filter(|&&x| x > 0.0).map(|&x| -x));
    grid.extend(half.iter().copied());
    for k in 0..base.len() {
        let t = base.t(k);
        if t > edge + gap {
            grid.push(t);
        }
    }
    let w = m.width();
    let mut gamma = Vec::with_capacity(grid.len() * w);
    let mut d1 = Vec::with_capacity(grid.len() * w);
    let mut d2 = Vec::with_capacity(grid.len() * w);
    let mut qerr = 0.0f64;
    let mut base_k = 0usize;
    for &s in &grid {
        let on_base = s.abs() > edge;
        if on_base {
            while base.t(base_k) != s {
                base_k += 1;
            }
        }
        let j = m.jet_at(s, D2Regime::Auto)?;
        if on_base {
            gamma.extend_from_slice(base.raw(base_k));
        } else {
            gamma.extend_from_slice(&j.value);
        }
        d1.extend_from_slice(&j.d1);
        d2.extend_from_slice(&j.d2);
        qerr = qerr.max(j.error);
    }
    m.s_grid = grid;
    m.gamma = gamma;
    m.d1 = d1;
    m.d2 = d2;
    m.quadrature_error = qerr;
    Ok(m)
}

/// `∂_t γ_δ` at refined node `k`.
pub fn d1_gamma_delta(m: &MollifiedPath, k: usize) -> Result<SliceTensor> {
    if k >= m.len() {
        return Err(Error::Stencil { index: k, reason: "node outside the refined grid" });
    }
    Ok(SliceTensor { kind: m.kind(), data: m.d1_at_node(k).to_vec() })
}

/// `∂²_t γ_δ` at refined node `k`.
pub fn d2_gamma_delta(m: &MollifiedPath, k: usize) -> Result<SliceTensor> {
    if k >= m.len() {
        return Err(Error::Stencil { index: k, reason: "node outside the refined grid" });
    }
    Ok(SliceTensor { kind: m.kind(), data: m.d2_at_node(k).to_vec() })
}

/// Measured quantities behind the three mollifier lemmas.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaReport {
    pub delta: f64,
    pub lipschitz_l: f64,
    /// `max ‖γ_δ - γ‖_∞` over the refined grid.
    pub c0_deviation: f64,
    /// `L δ²`.
    pub c0_bound: f64,
    /// `max ‖γ_δ - γ‖_∞` over refined nodes with `|s| > δ/2`.
    pub outside_deviation: f64,
    /// Whether every base node outside the band is reproduced bit-identically.
    pub outside_bit_identical: bool,
    /// Largest jump of `∂γ_δ` between neighbouring refined nodes in the band,
    /// divided by their spacing.
    pub c1_modulus: f64,
    /// Largest `‖d1 - FD‖` and `‖d2 - FD‖` at FD steps `h` and `h/2`, relative
    /// to the band sup norm of the respective derivative.
    pub d1_fd_errors: [f64; 2],
    pub d2_fd_errors: [f64; 2],
    pub d1_fd_order: f64,
    pub d2_fd_order: f64,
    /// Largest roundoff-plus-quadrature noise the fine-step differences can
    /// carry, on the same relative scale as the errors.
    pub d1_fd_noise: f64,
    pub d2_fd_noise: f64,
    /// Refined node where the coarse-step `d2` discrepancy peaks.
    pub d2_fd_worst_s: f64,
    /// Largest gap between the two second-derivative formulas on their overlap.
    pub regime_overlap: f64,
    /// `min_s λ_min(γ_δ(s)) - min over the window of λ_min(γ)`, must be ≥ 0.
    pub eigen_margin: f64,
    pub quadrature_error: f64,
}

impl LemmaReport {
    pub fn outside_ok(&self) -> bool {
        self.outside_bit_identical && self.outside_deviation <= 1e-10
    }

    pub fn c0_ok(&self) -> bool {
        self.c0_deviation <= self.c0_bound
    }

    pub fn fd_ok(&self) -> bool {
        let ok = |e: [f64; 2], p: f64, noise: f64| p >= 1.8 || e[1] <= noise.max(1e-9);
        ok(self.d1_fd_errors, self.d1_fd_order, self.d1_fd_noise)
            && ok(self.d2_fd_errors, self.d2_fd_order, self.d2_fd_noise)
    }

    pub fn overlap_ok(&self) -> bool {
        self.regime_overlap <= 1e-8
    }

    pub fn all_ok(&self) -> bool {
        self.outside_ok() && self.c0_ok() && self.fd_ok() && self.overlap_ok() && self.eigen_margin >= -1e-14
    }
}

fn min_eigenvalue(kind: SliceKind, g: &[f64]) -> f64 {
    match kind {
        SliceKind::Sphere { .. } => g[0],
        SliceKind::Torus { .. } => g.chunks(3).map(|s| min_eig2(&[s[0], s[1], s[2]])).fold(f64::INFINITY, f64::min),
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Checks the mollifier lemmas on the refined grid of `m`.
pub fn verify_lemmas(m: &MollifiedPath) -> Result<LemmaReport> {
    let w = m.width();
    let delta = m.delta();
    let half = 0.5 * delta;
    let kind = m.kind();
    let base = &m.base;
    let mut ref_val = vec![0.0; w];
    let mut c0: f64 = 0.0;
    let mut outside: f64 = 0.0;
    let mut bit_identical = true;
    let mut eigen_margin = f64::INFINITY;
    let mut base_k = 0usize;
    for (k, &s) in m.s_grid.iter().enumerate() {
        let g = m.gamma_at_node(k);
        m.spline.value_into(s, &mut ref_val);
        let dev = sup_diff(g, &ref_val);
        c0 = c0.max(dev);
        if s.abs() > half {
            outside = outside.max(dev);
            while base_k < base.len() && base.t(base_k) < s {
                base_k += 1;
            }
            if base_k < base.len() && base.t(base_k) == s && g != base.raw(base_k) {
                bit_identical = false;
            }
        } else {
            let sig = sigma_delta(&m.config, s);
            let mut window_min = f64::INFINITY;
            for i in 0..=16 {
                let tau = s - sig + 2.0 * sig * i as f64 / 16.0;
                m.spline.value_into(tau, &mut ref_val);
                window_min = window_min.min(min_eigenvalue(kind, &ref_val));
            }
            eigen_margin = eigen_margin.min(min_eigenvalue(kind, g) - window_min * (1.0 - 1e-12));
        }
    }
    let mut c1: f64 = 0.0;
    let mut d1e = [0.0f64; 2];
    let mut d2e = [0.0f64; 2];
    let mut overlap: f64 = 0.0;
    let mut worst = 0.0;
    let n = m.len();
    let wi = m.inner_width();
    // errors are measured relative to the sup norm over the band
    let (mut scale1, mut scale2) = (1.0f64, 1.0f64);
    let mut big: f64 = 0.0;
    for (k, &s) in m.s_grid.iter().enumerate() {
        if s.abs() <= half {
            scale1 = m.d1_at_node(k).iter().fold(scale1, |a, v| a.max(v.abs()));
            scale2 = m.d2_at_node(k).iter().fold(scale2, |a, v| a.max(v.abs()));
            big = m.gamma_at_node(k).iter().fold(big, |a, v| a.max(v.abs()));
        }
    }
    // noise of one γ_δ value
    let eta = 4.0 * f64::EPSILON * big + m.quadrature_error;
    let (mut noise1, mut noise2) = (0.0f64, 0.0f64);
    // shortest step whose half keeps the d2 noise under 1e-3 of the scale
    let h_floor = 2.0 * (4.0 * eta / (1e-3 * scale2)).sqrt();
    for k in 1..n - 1 {
        let s = m.s_grid[k];
        if s.abs() > half {
            continue;
        }
        let sp = m.s_grid[k + 1] - s;
        c1 = c1.max(sup_diff(m.d1_at_node(k + 1), m.d1_at_node(k)) / sp);
        let h0 = (0.5 * (m.s_grid[k + 1] - m.s_grid[k - 1]).min(2.0 * sp)).max(h_floor);
        noise1 = noise1.max(eta / (0.5 * h0) / scale1);
        noise2 = noise2.max(4.0 * eta / (0.25 * h0 * h0) / scale2);
        for (level, h) in [h0, 0.5 * h0].into_iter().enumerate() {
            let p = m.jet_at(s + h, D2Regime::Auto)?;
            let q = m.jet_at(s - h, D2Regime::Auto)?;
            let g = m.gamma_at_node(k);
            for c in 0..w {
                let fd1 = (p.value[c] - q.value[c]) / (2.0 * h);
                let fd2 = (p.value[c] - 2.0 * g[c] + q.value[c]) / (h * h);
                d1e[level] = d1e[level].max((fd1 - m.d1_at_node(k)[c]).abs() / scale1);
                let e2 = (fd2 - m.d2_at_node(k)[c]).abs() / scale2;
                if level == 0 && e2 > d2e[0] {
                    worst = s;
                }
                d2e[level] = d2e[level].max(e2);
            }
        }
        if s.abs() > wi && s.abs() < 0.25 * delta {
            let a = m.jet_at(s, D2Regime::Outer)?;
            let b = m.jet_at(s, D2Regime::Inner)?;
            overlap = overlap.max(sup_diff(&a.d2, &b.d2));
        }
    }
    let order = |e: [f64; 2]| if e[1] > 0.0 && e[0] > 0.0 { (e[0] / e[1]).log2() } else { f64::INFINITY };
    Ok(LemmaReport {
        delta,
        lipschitz_l: base.lipschitz_l,
        c0_deviation: c0,
        c0_bound: base.lipschitz_l * delta * delta,
        outside_deviation: outside,
        outside_bit_identical: bit_identical,
        c1_modulus: c1,
        d1_fd_errors: d1e,
        d2_fd_errors: d2e,
        d1_fd_order: order(d1e),
        d2_fd_order: order(d2e),
        d1_fd_noise: noise1,
        d2_fd_noise: noise2,
        d2_fd_worst_s: worst,
        regime_overlap: overlap,
        eigen_margin: if eigen_margin.is_finite() { eigen_margin } else { 0.0 },
        quadrature_error: m.quadrature_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corner::{CornerMetric, SphericalCorner};

    const KIND: SliceKind = SliceKind::Sphere { ambient_dim: 3 };

    fn scalar_path(f: impl Fn(f64) -> f64, eps: f64, n_t: usize) -> MetricPath {
        let h = 4.0 * eps / n_t as f64;
        let c = n_t / 2;
        let v = (0..=n_t).map(|k| f(if k == c { 0.0 } else { -2.0 * eps + k as f64 * h })).collect();
        MetricPath::from_samples(KIND, eps, n_t, v).unwrap()
    }

    fn abs_moment() -> f64 {
        let k = Mollifier::new();
        AdaptiveRule::default().integrate_split(&[-1.0, 0.0, 1.0], 1e-15, |u| u.abs() * k.eval(u)).unwrap().0
    }

    #[test]
    fn sigma_delta_examples() {
        let c = MollifierConfig::new(0.1);
        assert!((sigma_delta(&c, 0.0) - 1e-4).abs() < 1e-18);
        assert_eq!(sigma_delta(&c, 0.06), 0.0);
        assert_eq!(sigma_delta(&c, 0.05), 0.0);
        let v = sigma_delta(&c, 0.04);
        assert!(v > 0.0 && v < 1e-4);
        assert!((sigma_delta(&c, 0.024) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn config_rejects_wide_bandwidth() {
        assert!(MollifierConfig::new(0.2).validate(1.0).is_err());
        assert!(MollifierConfig::new(0.1).validate(1.0).is_ok());
    }

    #[test]
    fn constant_and_affine_paths_are_fixed() {
        let m = mollify_path(&scalar_path(|_| 2.5, 1.0, 80), &MollifierConfig::new(0.1)).unwrap();
        for k in 0..m.len() {
            assert!((m.gamma_at_node(k)[0] - 2.5).abs() < 1e-13);
            assert!(m.d1_at_node(k)[0].abs() < 1e-11);
        }
        let m = mollify_path(&scalar_path(|t| 3.0 + t, 1.0, 80), &MollifierConfig::new(0.1)).unwrap();
        for (k, &s) in m.s_grid.iter().enumerate() {
            assert!((m.gamma_at_node(k)[0] - (3.0 + s)).abs() < 1e-12, "s={s}");
            assert!((m.d1_at_node(k)[0] - 1.0).abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn kinked_path_at_corner() {
        let delta = 0.1;
        let m = mollify_path(&scalar_path(|t| 1.0 + t.abs(), 1.0, 80), &MollifierConfig::new(delta)).unwrap();
        let j = m.jet_at(0.0, D2Regime::Auto).unwrap();
        let expected = 1.0 + 1e-4 * abs_moment();
        assert!((j.value[0] - expected).abs() < 1e-14, "{} vs {expected}", j.value[0]);
        assert!(j.d1[0].abs() < 1e-12, "{}", j.d1[0]);
        let peak = 2.0 * m.kernel().eval(0.0) / 1e-4;
        assert!((j.d2[0] - peak).abs() < 1e-6 * peak, "{} vs {peak}", j.d2[0]);
        // FD on the mollified values
        let h = 1e-6;
        let p = m.value_at(h).unwrap()[0];
        let q = m.value_at(-h).unwrap()[0];
        let fd2 = (p - 2.0 * j.value[0] + q) / (h * h);
        assert!((fd2 - j.d2[0]).abs() < 1e-3 * peak);
    }

    #[test]
    fn quadratic_path_second_derivative() {
        let delta = 0.05;
        let m = mollify_path(&scalar_path(|t| 1.0 + t * t, 1.0, 80), &MollifierConfig::new(delta)).unwrap();
        for (k, &s) in m.s_grid.iter().enumerate() {
            let d = m.d2_at_node(k)[0] - 2.0;
            assert!(d.abs() < delta * delta, "s={s} d={d}");
            if s.abs() >= 0.5 * delta {
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lemma_report_on_kinked_path() {
        for delta in [0.1, 0.05, 0.025] {
            let m = mollify_path(&scalar_path(|t| 1.0 + t.abs(), 1.0, 80), &MollifierConfig::new(delta)).unwrap();
            let r = verify_lemmas(&m).unwrap();
            assert!(r.all_ok(), "{r:?}");
            assert!((r.lipschitz_l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzschild_collar_lemmas() {
        let corner = CornerMetric::Spherical(SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap());
        let base = crate::collar::build_collar(&corner, 1.0, 400, 0).unwrap();
        let m = mollify_path(&base, &MollifierConfig::new(0.05)).unwrap();
        let r = verify_lemmas(&m).unwrap();
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn dirac_weight_integrates_to_one() {
        let k = Mollifier::new();
        for delta in [0.1, 0.05, 0.025] {
            let w = delta * delta / 100.0;
            let (v, _) = AdaptiveRule::default().integrate_split(&[-w, 0.0, w], 1e-13, |t| k.scaled(t, w)).unwrap();
            assert!((v - 1.0).abs() < 1e-10);
        }
    }
}
