//! The two conformal deformations and the mass bookkeeping in spherical
//! symmetry, for `g = ds² + r(s)² ĝ_{S^{n-1}}`.
//!
//! Both elliptic problems are written in the proper distance `s` of the
//! smoothed metric `g_δ`:
//!
//! * first: `(r^{n-1} u')' = -c_n R₋ r^{n-1} u`, `u → 1`;
//! * second, on `g̃ = u^{4/(n-2)} g`: `(u² r^{n-1} v')' = c_n R̃ u^{2n/(n-2)} r^{n-1} v`,
//!   `v → 1`, with `R̃ = u^{-4/(n-2)} R₊`.
//!
//! Beyond the last node the metric is vacuum (flat or Schwarzschild), so the
//! harmonic extension and the Robin condition are exact.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::bvp::{shoot, solve_fd, OdeTolerance, RadialOperator, ShootStart};
use crate::corner::{InnerBoundary, Side, SphericalCorner};
use crate::mollifier::{D2Regime, MollifiedPath};
use crate::profile::{hawking_mass, radial_scalar_curvature, RadialJet, RadialProfile};
use crate::{Error, Result};

/// Volume of the unit `(n-1)`-sphere in `R^n`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    // |S^{k}| = 2π/(k-1) |S^{k-2}|
    let k = n - 1;
    let mut v = if k % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        v *= 2.0 * PI / (j - 1) as f64;
        j += 2;
    }
    v
}

/// `c_n = (n-2) / (4(n-1))`.
pub fn conformal_constant(n: usize) -> f64 {
    (n - 2) as f64 / (4.0 * (n - 1) as f64)
}

/// Radial profile of `g_δ` at arbitrary `s`: the mollified path inside the
/// band `|s - s_Σ| < δ/2`, the closed-form sides elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct RadialGeometry<'a> {
    pub corner: &'a SphericalCorner,
    pub mollified: Option<&'a MollifiedPath>,
}

impl<'a> RadialGeometry<'a> {
    pub fn new(corner: &'a SphericalCorner, mollified: Option<&'a MollifiedPath>) -> Result<Self> {
        if let Some(m) = mollified {
            match m.kind() {
                crate::slice::SliceKind::Sphere { ambient_dim } if ambient_dim == corner.ambient_dim => {}
                _ => return Err(Error::InvalidConfig("mollified path does not belong to this spherical corner".into())),
            }
        }
        corner.inner_boundary()?;
        exterior_tail(corner, 1.0 + corner.corner_s)?;
        Ok(RadialGeometry { corner, mollified })
    }

    pub fn dim(&self) -> usize {
        self.corner.ambient_dim
    }

    pub fn in_band(&self, s: f64) -> bool {
        match self.mollified {
            Some(m) => (s - self.corner.corner_s).abs() < 0.5 * m.delta(),
            None => false,
        }
    }

    /// Radial jet and scalar curvature at `s`.
    pub fn eval(&self, s: f64) -> Result<(RadialJet, f64)> {
        let n = self.dim();
        if let (true, Some(m)) = (self.in_band(s), self.mollified) {
            let j = m.jet_at(s - self.corner.corner_s, D2Regime::Auto)?;
            let (q, q1, q2) = (j.value[0], j.d1[0], j.d2[0]);
            let r = q.sqrt();
            let jet = RadialJet { r, dr: q1 / (2.0 * r), ddr: q2 / (2.0 * r) - q1 * q1 / (4.0 * r * r * r) };
            return Ok((jet, radial_scalar_curvature(n, &jet)));
        }
        let side = if s <= self.corner.corner_s { Side::Minus } else { Side::Plus };
        let profile = self.corner.profile(side);
        Ok((profile.jet(s)?, profile.scalar_curvature(n)))
    }
}

/// `J(r) = ∫_s^∞ ds'/r^{n-1}` over the vacuum exterior.
pub fn exterior_tail(corner: &SphericalCorner, r: f64) -> Result<f64> {
    let n = corner.ambient_dim;
    match corner.outer {
        RadialProfile::Flat { .. } => Ok(r.powi(2 - n as i32) / (n - 2) as f64),
        RadialProfile::Schwarzschild { mass, .. } | RadialProfile::SchwarzschildThroat { mass } => {
            if mass == 0.0 {
                Ok(1.0 / r)
            } else {
                Ok((1.0 - (1.0 - 2.0 * mass / r).sqrt()) / mass)
            }
        }
        RadialProfile::RoundSphere { .. } => {
            Err(Error::InvalidConfig("the exterior must be asymptotically flat and vacuum".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SphericalMetric {
    pub n_dim: usize,
    pub inner: InnerBoundary,
    /// Proper distance from the inner end.
    pub s_grid: Vec<f64>,
    pub r: Vec<f64>,
    pub dr: Vec<f64>,
    pub ddr: Vec<f64>,
    pub scalar: Vec<f64>,
    /// Exterior Schwarzschild mass when the far region is exactly vacuum.
    pub adm_mass_parameter: Option<f64>,
}

impl SphericalMetric {
    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    /// Misner–Sharp mass at every node.
    pub fn hawking_masses(&self) -> Vec<f64> {
        self.r.iter().zip(&self.dr).map(|(&r, &dr)| hawking_mass(self.n_dim, r, dr)).collect()
    }
}

/// Grid controls for the radial solves.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridOptions {
    /// Largest spacing on the inner side of `Σ`.
    pub interior_spacing: f64,
    /// Largest spacing in the exterior.
    pub max_spacing: f64,
    /// Ratio between neighbouring intervals in the graded zones.
    pub growth: f64,
    /// `s_max = s_Σ + factor · r(Σ)`.
    pub s_max_factor: f64,
    pub max_nodes: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { interior_spacing: 4e-3, max_spacing: 0.05, growth: 1.05, s_max_factor: 24.0, max_nodes: 20_000 }
    }
}

impl GridOptions {
    pub fn s_max(&self, corner: &SphericalCorner) -> Result<f64> {
        let r = corner.side_jet(Side::Minus, 0.0)?.r;
        Ok(corner.corner_s + self.s_max_factor * r)
    }
}

/// Graded nodes from `from` towards `to` (either direction), starting at
/// spacing `h0`, growing to `h_max`, then uniform; ends exactly at `to`.
fn graded(from: f64, to: f64, h0: f64, h_max: f64, growth: f64) -> Vec<f64> {
    let dir = if to > from { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    let mut x = from;
    let mut h = h0;
    while h < h_max {
        h = (h * growth).min(h_max);
        if (to - x) * dir <= 2.0 * h {
            break;
        }
        x += dir * h;
        out.push(x);
    }
    let left = (to - x).abs();
    let k = (left / h.min(h_max)).ceil().max(1.0) as usize;
    for j in 1..k {
        out.push(x + dir * left * j as f64 / k as f64);
    }
    out.push(to);
    out
}

/// Radial grid: interior, the mollifier's band nodes shifted to `s_Σ + t`,
/// exterior out to `s_max`.
pub fn radial_grid(geom: &RadialGeometry, opts: &GridOptions, s_max: f64) -> Result<Vec<f64>> {
    let cs = geom.corner.corner_s;
    if !(s_max > cs + 1.0) {
        return Err(Error::InvalidConfig("s_max must lie well beyond the corner".into()));
    }
    let band: Vec<f64> = match geom.mollified {
        Some(m) => {
            let edge = 0.55 * m.delta() * (1.0 + 1e-12);
            m.s_grid.iter().filter(|t| t.abs() <= edge).map(|t| cs + t).collect()
        }
        None => vec![cs],
    };
    let lo = band[0];
    let hi = band[band.len() - 1];
    let (h_lo, h_hi) = if band.len() > 1 {
        (band[1] - band[0], band[band.len() - 1] - band[band.len() - 2])
    } else {
        (opts.interior_spacing, opts.interior_spacing)
    };
    if !(h_lo > 0.0 && h_hi > 0.0) {
        return Err(Error::Geometry("band nodes are not strictly increasing".into()));
    }
    let mut grid: Vec<f64> = graded(lo, 0.0, h_lo, opts.interior_spacing, opts.growth);
    grid.reverse();
    grid[0] = 0.0;
    grid.extend_from_slice(&band);
    grid.extend(graded(hi, s_max, h_hi, opts.max_spacing, opts.growth));
    if grid.len() > opts.max_nodes {
        return Err(Error::InvalidConfig(alloc::format!(
            "radial grid needs {} nodes, more than the limit {}",
            grid.len(),
            opts.max_nodes
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Geometry("radial grid is not increasing".into()));
    }
    Ok(grid)
}

/// Samples `g_δ` on `grid`.
pub fn build_metric(geom: &RadialGeometry, grid: &[f64]) -> Result<SphericalMetric> {
    let n = grid.len();
    let mut m = SphericalMetric {
        n_dim: geom.dim(),
        inner: geom.corner.inner_boundary()?,
        s_grid: grid.to_vec(),
        r: Vec::with_capacity(n),
        dr: Vec::with_capacity(n),
        ddr: Vec::with_capacity(n),
        scalar: Vec::with_capacity(n),
        adm_mass_parameter: geom.corner.exterior_mass(),
    };
    for &s in grid {
        let (j, r) = geom.eval(s)?;
        if s > 0.0 && !(j.r > 0.0) {
            return Err(Error::Geometry(alloc::format!("areal radius vanishes at s = {s}")));
        }
        m.r.push(j.r);
        m.dr.push(j.dr);
        m.ddr.push(j.ddr);
        m.scalar.push(r);
    }
    Ok(m)
}

/// Scalar curvature from the sampled jets; a center node takes the
/// quadratic extrapolation of its three neighbours.
pub fn spherical_scalar_curvature(metric: &SphericalMetric) -> Vec<f64> {
    let n = metric.n_dim;
    let mut out: Vec<f64> = (0..metric.len())
        .map(|i| {
            let j = RadialJet { r: metric.r[i], dr: metric.dr[i], ddr: metric.ddr[i] };
            if j.r > 0.0 {
                radial_scalar_curvature(n, &j)
            } else {
                f64::NAN
            }
        })
        .collect();
    if metric.len() > 3 && !(metric.r[0] > 0.0) {
        let x = &metric.s_grid;
        let (x1, x2, x3) = (x[1] - x[0], x[2] - x[0], x[3] - x[0]);
        let l1 = x2 * x3 / ((x1 - x2) * (x1 - x3));
        let l2 = x1 * x3 / ((x2 - x1) * (x2 - x3));
        let l3 = x1 * x2 / ((x3 - x1) * (x3 - x2));
        out[0] = l1 * out[1] + l2 * out[2] + l3 * out[3];
    }
    out
}

/// Which of the two conformal problems is posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Deformation {
    First,
    Second,
}

/// A conformal problem on the grid of `g_δ`. `potential` is stored
/// nonnegative: `c_n R₋` for the first problem, `c_n R̃` for the second.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalProblem {
    pub deformation: Deformation,
    pub potential: Vec<f64>,
    pub c_n: f64,
    pub omega_n: f64,
}

impl ConformalProblem {
    pub fn first(metric: &SphericalMetric) -> Self {
        let c = conformal_constant(metric.n_dim);
        ConformalProblem {
            deformation: Deformation::First,
            potential: metric.scalar.iter().map(|&r| c * (-r).max(0.0)).collect(),
            c_n: c,
            omega_n: unit_sphere_volume(metric.n_dim),
        }
    }

    pub fn second(metric: &SphericalMetric, first: &ConformalSolution) -> Self {
        let n = metric.n_dim;
        let c = conformal_constant(n);
        let e = -4.0 / (n - 2) as f64;
        ConformalProblem {
            deformation: Deformation::Second,
            potential: metric.scalar.iter().zip(&first.u).map(|(&r, &u)| c * u.powf(e) * r.max(0.0)).collect(),
            c_n: c,
            omega_n: unit_sphere_volume(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    pub shooting: bool,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Outer fraction of the radial range used by the decay fit.
    pub decay_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { shooting: true, ode_rtol: 1e-11, ode_atol: 1e-14, decay_fraction: 0.1 }
    }
}

impl SolverOptions {
    fn ode(&self) -> OdeTolerance {
        OdeTolerance { rtol: self.ode_rtol, atol: self.ode_atol, ..OdeTolerance::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConformalSolution {
    pub deformation: Deformation,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub ddu: Vec<f64>,
    /// Stored potential (`c_n R₋` or `c_n R̃`).
    pub potential: Vec<f64>,
    /// `A` from a least-squares fit of `u - 1` against the exact harmonic
    /// decay profile over the outer nodes.
    pub a_decay: f64,
    /// `A` from the energy identity `(2-n) ω_n A = energy`.
    pub a_integral: f64,
    /// `A` from the shooting cross-check.
    pub a_shooting: Option<f64>,
    /// `max |u_fd - u_shoot|`.
    pub shooting_deviation: Option<f64>,
    /// `∫ [|∇u|² ∓ potential u²] dV` over the whole space, exterior included.
    pub energy: f64,
    /// `(∫ R₋^{n/2} dV)^{2/n}` of `g_δ`.
    pub smallness: f64,
    pub sup_deviation: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub residual: f64,
}

/// Everything the finite-volume and shooting solves need at one level.
struct Coefficients {
    /// Smooth flux factor: 1 or `u²`.
    a: Vec<f64>,
    /// Smooth volume factor: 1 or `u^{2n/(n-2)}`.
    b: Vec<f64>,
    /// Signed potential `V` of `(P u')' = W V u`.
    v: Vec<f64>,
    tail: f64,
    /// `J(s_i)/(inner factor)` at the nodes used for the decay fit.
    decay_basis: Vec<f64>,
}

fn tails(geom: &RadialGeometry, metric: &SphericalMetric) -> Result<Vec<f64>> {
    metric.r.iter().map(|&r| if r > 0.0 { exterior_tail(geom.corner, r) } else { Ok(f64::INFINITY) }).collect()
}

fn solve_level(
    geom: &RadialGeometry,
    metric: &SphericalMetric,
    problem: &ConformalProblem,
    coefs: &Coefficients,
    opts: &SolverOptions,
    first: Option<&ConformalSolution>,
) -> Result<ConformalSolution> {
    let n = metric.n_dim;
    let nodes = metric.len();
    let op = RadialOperator::from_radius(
        &metric.s_grid,
        n,
        |s| Ok(geom.eval(s)?.0.r),
        &coefs.a,
        &coefs.b,
        &coefs.v,
        coefs.tail,
    )?;
    let fd = solve_fd(&op)?;
    let u = fd.u;
    let dev = fd.deviation;
    let nd = (n - 2) as f64;
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    let max_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let smallness = smallness_diagnostic(metric);
    if !(min_u > 0.0) {
        return Err(Error::SmallnessViolated { min_u, smallness });
    }
    if problem.deformation == Deformation::Second && max_u > 1.0 + 1e-10 {
        return Err(Error::Solver { residual: max_u - 1.0 });
    }
    let e = (n - 1) as i32;
    let mut du = vec![0.0; nodes];
    let mut ddu = vec![0.0; nodes];
    for i in 0..nodes {
        let r = metric.r[i];
        if r > 0.0 {
            let p = coefs.a[i] * r.powi(e);
            du[i] = fd.flux[i] / p;
        }
    }
    for i in 0..nodes {
        let (r, dr) = (metric.r[i], metric.dr[i]);
        let ratio = coefs.b[i] / coefs.a[i];
        let src = ratio * coefs.v[i] * u[i];
        ddu[i] = if r > 0.0 {
            let da = match first {
                Some(f) => 2.0 * f.du[i] / f.u[i],
                None => 0.0,
            };
            src - (da + (n - 1) as f64 * dr / r) * du[i]
        } else {
            src / n as f64
        };
    }
    let s0 = metric.s_grid[0];
    let s_n = metric.s_grid[nodes - 1];
    let cut = s_n - opts.decay_fraction * (s_n - s0);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..nodes {
        if metric.s_grid[i] >= cut {
            let phi = nd * coefs.decay_basis[i];
            num += dev[i] * phi;
            den += phi * phi;
        }
    }
    let a_decay = num / den;
    let a_integral = -fd.energy / nd;
    let sup_deviation = dev.iter().map(|x| x.abs()).fold(0.0, f64::max);

    let (a_shooting, shooting_deviation) = if opts.shooting {
        let shot = shoot_level(geom, metric, problem.deformation, first, opts)?;
        let dev = shot.u.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (Some(-shot.flux_out / nd), Some(dev))
    } else {
        (None, None)
    };
    Ok(ConformalSolution {
        deformation: problem.deformation,
        u,
        du,
        ddu,
        potential: problem.potential.clone(),
        a_decay,
        a_integral,
        a_shooting,
        shooting_deviation,
        energy: problem.omega_n * fd.energy,
        smallness,
        sup_deviation,
        min_u,
        max_u,
        residual: fd.residual,
    })
}

fn shoot_level(
    geom: &RadialGeometry,
    metric: &SphericalMetric,
    deformation: Deformation,
    first: Option<&ConformalSolution>,
    opts: &SolverOptions,
) -> Result<crate::bvp::ShotSolution> {
    let n = metric.n_dim;
    let c = conformal_constant(n);
    let e = (n - 1) as i32;
    let pw = 2.0 * n as f64 / (n - 2) as f64;
    let pv = -4.0 / (n - 2) as f64;
    let x = &metric.s_grid;
    let start = match metric.inner {
        InnerBoundary::Center => ShootStart::Center { dim: n, offset: (0.25 * (x[1] - x[0])).min(1e-5) },
        InnerBoundary::Throat => ShootStart::Throat,
    };
    let j_n = exterior_tail(geom.corner, metric.r[metric.len() - 1])?;
    let levels = match deformation {
        Deformation::First => 1,
        Deformation::Second => 2,
    };
    let coef = |s: f64, y: &[f64], out: &mut [[f64; 3]]| -> Result<()> {
        let (jet, scal) = geom.eval(s)?;
        let p = jet.r.powi(e);
        out[0] = [p, p, -c * (-scal).max(0.0)];
        if out.len() > 1 {
            let u = y[0];
            out[1] = [u * u * p, u.powf(pw) * p, c * u.powf(pv) * scal.max(0.0)];
        }
        Ok(())
    };
    let tail = |k: usize, y: &[f64]| if k == 0 { j_n } else { j_n / y[0] };
    let mut sols = shoot(x, levels, start, coef, tail, opts.ode())?;
    let shot = sols.pop().ok_or(Error::Solver { residual: f64::INFINITY })?;
    if let (Some(f), Some(u1)) = (first, sols.first()) {
        // the coupled first level must reproduce the first solve
        let dev = u1.u.iter().zip(&f.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !(dev < 1e-3) {
            return Err(Error::Solver { residual: dev });
        }
    }
    Ok(shot)
}

/// `(∫ R₋^{n/2} dV)^{2/n}` by the trapezoid rule.
pub fn smallness_diagnostic(metric: &SphericalMetric) -> f64 {
    let n = metric.n_dim;
    let omega = unit_sphere_volume(n);
    let f: Vec<f64> = (0..metric.len())
        .map(|i| (-metric.scalar[i]).max(0.0).powf(0.5 * n as f64) * omega * metric.r[i].powi(n as i32 - 1))
        .collect();
    let mut acc = 0.0;
    for i in 0..metric.len() - 1 {
        acc += 0.5 * (f[i] + f[i + 1]) * (metric.s_grid[i + 1] - metric.s_grid[i]);
    }
    acc.powf(2.0 / n as f64)
}

/// First deformation: removes the negative part of the scalar curvature.
pub fn solve_first_deformation(
    geom: &RadialGeometry,
    metric: &SphericalMetric,
    opts: &SolverOptions,
) -> Result<ConformalSolution> {
    let problem = ConformalProblem::first(metric);
    let nodes = metric.len();
    let j = tails(geom, metric)?;
    let coefs = Coefficients {
        a: vec![1.0; nodes],
        b: vec![1.0; nodes],
        v: problem.potential.iter().map(|p| -p).collect(),
        tail: j[nodes - 1],
        decay_basis: j,
    };
    solve_level(geom, metric, &problem, &coefs, opts, None)
}

/// Second deformation on `g̃ = u^{4/(n-2)} g_δ`, posed in the coordinates of
/// `g_δ`; `first` is the solution of the first problem on the same grid.
pub fn solve_second_deformation(
    geom: &RadialGeometry,
    metric: &SphericalMetric,
    first: &ConformalSolution,
    opts: &SolverOptions,
) -> Result<ConformalSolution> {
    if first.deformation != Deformation::First || first.u.len() != metric.len() {
        return Err(Error::InvalidConfig("second deformation needs the first solution on the same grid".into()));
    }
    let n = metric.n_dim;
    let problem = ConformalProblem::second(metric, first);
    let nodes = metric.len();
    let j = tails(geom, metric)?;
    let pw = 2.0 * n as f64 / (n - 2) as f64;
    let coefs = Coefficients {
        a: first.u.iter().map(|u| u * u).collect(),
        b: first.u.iter().map(|u| u.powf(pw)).collect(),
        v: problem.potential.clone(),
        tail: j[nodes - 1] / first.u[nodes - 1],
        decay_basis: j.iter().zip(&first.u).map(|(j, u)| j / u).collect(),
    };
    solve_level(geom, metric, &problem, &coefs, opts, Some(first))
}

/// `u^{4/(n-2)} g` for `u` given with its first two `s`-derivatives.
/// `scalar` of the result is the transformation law
/// `R̃ = u^{-(n+2)/(n-2)} (R u - Δu / c_n)`.
pub fn conformal_metric(metric: &SphericalMetric, u: &[f64], du: &[f64], ddu: &[f64]) -> Result<SphericalMetric> {
    let nodes = metric.len();
    if u.len() != nodes || du.len() != nodes || ddu.len() != nodes {
        return Err(Error::InvalidConfig("conformal factor does not match the grid".into()));
    }
    if let Some(i) = u.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Geometry(alloc::format!("conformal factor is not positive at node {i}")));
    }
    let n = metric.n_dim;
    let k = 2.0 / (n - 2) as f64;
    let c = conformal_constant(n);
    let mut out = SphericalMetric {
        n_dim: n,
        inner: metric.inner,
        s_grid: Vec::with_capacity(nodes),
        r: Vec::with_capacity(nodes),
        dr: Vec::with_capacity(nodes),
        ddr: Vec::with_capacity(nodes),
        scalar: Vec::with_capacity(nodes),
        adm_mass_parameter: None,
    };
    // ds̃ = u^k ds, Hermite-corrected trapezoid
    let f: Vec<f64> = u.iter().map(|x| x.powf(k)).collect();
    let df: Vec<f64> = (0..nodes).map(|i| k * f[i] / u[i] * du[i]).collect();
    let mut st = 0.0;
    for i in 0..nodes {
        if i > 0 {
            let h = metric.s_grid[i] - metric.s_grid[i - 1];
            st += 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
        }
        out.s_grid.push(st);
        let (r, dr, ddr) = (metric.r[i], metric.dr[i], metric.ddr[i]);
        let w = du[i] / u[i];
        out.r.push(f[i] * r);
        out.dr.push(dr + k * r * w);
        let d_drt = ddr + k * (dr * w + r * ddu[i] / u[i] - r * w * w);
        out.ddr.push(d_drt / f[i]);
        let lap = if r > 0.0 { ddu[i] + (n - 1) as f64 * dr / r * du[i] } else { n as f64 * ddu[i] };
        let e = -((n + 2) as f64) / (n - 2) as f64;
        out.scalar.push(u[i].powf(e) * (metric.scalar[i] * u[i] - lap / c));
    }
    Ok(out)
}

/// Limit of the Hawking mass at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MassLimit {
    pub value: f64,
    /// Change of the limit when only the outer half of the fit range is used.
    pub drift: f64,
}

fn cubic_limit(x: &[f64], y: &[f64]) -> Option<f64> {
    // least squares y ≈ c0 + c1 x + c2 x² + c3 x³ via normal equations
    let mut a = [[0.0f64; 5]; 4];
    for (&xi, &yi) in x.iter().zip(y) {
        let p = [1.0, xi, xi * xi, xi * xi * xi];
        for r in 0..4 {
            for c in 0..4 {
                a[r][c] += p[r] * p[c];
            }
            a[r][4] += p[r] * yi;
        }
    }
    if x.len() < 4 {
        return None;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        a.swap(col, piv);
        if a[col][col] == 0.0 {
            return None;
        }
        for row in 0..4 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..5 {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some(a[0][4] / a[0][0])
}

/// Fits the Hawking mass over the nodes with `r ≥ r_max/4` by a cubic in
/// `r_max/r` and returns the intercept; `tol` bounds the drift.
pub fn hawking_mass_limit(metric: &SphericalMetric, tol: f64) -> Result<MassLimit> {
    let m = metric.hawking_masses();
    let r_max = metric.r.iter().copied().fold(0.0, f64::max);
    let pick = |frac: f64| -> (Vec<f64>, Vec<f64>) {
        metric.r.iter().zip(&m).filter(|(r, _)| **r >= frac * r_max).map(|(r, m)| (r_max / r, *m)).unzip()
    };
    let (x4, y4) = pick(0.25);
    let (x2, y2) = pick(0.5);
    let full = cubic_limit(&x4, &y4).ok_or(Error::Asymptotics { drift: f64::INFINITY })?;
    let half = cubic_limit(&x2, &y2).ok_or(Error::Asymptotics { drift: f64::INFINITY })?;
    let drift = (full - half).abs();
    if !(drift <= tol * (1.0 + full.abs())) {
        return Err(Error::Asymptotics { drift });
    }
    Ok(MassLimit { value: full, drift })
}

/// Masses of `g_δ`, `g̃_δ`, `ĝ_δ` and the two mass-difference identities.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MassReport {
    pub m_base: f64,
    pub m_tilde: f64,
    /// `m(g_δ) + (n-1) A`.
    pub m_tilde_predicted: f64,
    pub m_hat: Option<f64>,
    /// `m(g̃_δ) + (n-1) B`.
    pub m_hat_predicted: Option<f64>,
    /// Residual of `m(g_δ) = m(g̃_δ) + (n-1)/(n-2) ω_n E₁`.
    pub first_identity_stated: f64,
    /// Residual of `m(g_δ) = m(g̃_δ) + (n-1)/((n-2) ω_n) E₁`.
    pub first_identity_consistent: f64,
    pub second_identity_stated: Option<f64>,
    pub second_identity_consistent: Option<f64>,
    pub max_drift: f64,
}

pub fn masses(
    base: &SphericalMetric,
    first: &ConformalSolution,
    second: Option<&ConformalSolution>,
    tol: f64,
) -> Result<MassReport> {
    let n = base.n_dim;
    let omega = unit_sphere_volume(n);
    let stated = (n - 1) as f64 / (n - 2) as f64 * omega;
    let consistent = (n - 1) as f64 / ((n - 2) as f64 * omega);
    let mb = hawking_mass_limit(base, tol)?;
    let tilde = conformal_metric(base, &first.u, &first.du, &first.ddu)?;
    let mt = hawking_mass_limit(&tilde, tol)?;
    let mut rep = MassReport {
        m_base: mb.value,
        m_tilde: mt.value,
        m_tilde_predicted: mb.value + (n - 1) as f64 * first.a_decay,
        m_hat: None,
        m_hat_predicted: None,
        first_identity_stated: mb.value - mt.value - stated * first.energy,
        first_identity_consistent: mb.value - mt.value - consistent * first.energy,
        second_identity_stated: None,
        second_identity_consistent: None,
        max_drift: mb.drift.max(mt.drift),
    };
    if let Some(v) = second {
        let w: Vec<f64> = first.u.iter().zip(&v.u).map(|(a, b)| a * b).collect();
        let dw: Vec<f64> = (0..base.len()).map(|i| first.du[i] * v.u[i] + first.u[i] * v.du[i]).collect();
        let ddw: Vec<f64> = (0..base.len())
            .map(|i| first.ddu[i] * v.u[i] + 2.0 * first.du[i] * v.du[i] + first.u[i] * v.ddu[i])
            .collect();
        let hat = conformal_metric(base, &w, &dw, &ddw)?;
        let mh = hawking_mass_limit(&hat, tol)?;
        rep.m_hat = Some(mh.value);
        rep.m_hat_predicted = Some(mt.value + (n - 1) as f64 * v.a_decay);
        rep.second_identity_stated = Some(mt.value - mh.value - stated * v.energy);
        rep.second_identity_consistent = Some(mt.value - mh.value - consistent * v.energy);
        rep.max_drift = rep.max_drift.max(mh.drift);
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineOptions {
    pub grid: GridOptions,
    pub solver: SolverOptions,
    /// Allowed drift of the Hawking-mass limit.
    pub asymptotic_tol: f64,
    /// Re-solve with `s_max` doubled and report the change of `A` and `B`.
    pub check_s_max: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            grid: GridOptions::default(),
            solver: SolverOptions::default(),
            asymptotic_tol: 1e-6,
            check_s_max: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineResult {
    pub metric: SphericalMetric,
    pub first: ConformalSolution,
    pub second: ConformalSolution,
    pub masses: MassReport,
    /// `max |R̃_transform - R̃_direct|` relative to `1 + max |R̃|`, away from the center.
    pub scalar_crosscheck: f64,
    /// `|ΔA|, |ΔB|` under doubling of `s_max`.
    pub s_max_shift: Option<(f64, f64)>,
}

/// Grid, both deformations and all masses for one smoothed metric.
pub fn run_pipeline(geom: &RadialGeometry, opts: &PipelineOptions) -> Result<PipelineResult> {
    let s_max = opts.grid.s_max(geom.corner)?;
    let grid = radial_grid(geom, &opts.grid, s_max)?;
    let metric = build_metric(geom, &grid)?;
    let first = solve_first_deformation(geom, &metric, &opts.solver)?;
    let second = solve_second_deformation(geom, &metric, &first, &opts.solver)?;
    let masses = masses(&metric, &first, Some(&second), opts.asymptotic_tol)?;
    let tilde = conformal_metric(&metric, &first.u, &first.du, &first.ddu)?;
    let direct = spherical_scalar_curvature(&tilde);
    let big = tilde.scalar.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let scalar_crosscheck = tilde
        .scalar
        .iter()
        .zip(&direct)
        .zip(&tilde.r)
        .filter(|(_, &r)| r > 0.0)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max)
        / (1.0 + big);
    let s_max_shift = if opts.check_s_max {
        let mut solver = opts.solver;
        solver.shooting = false;
        let mut g = opts.grid;
        g.max_nodes *= 2;
        let grid2 = radial_grid(geom, &g, 2.0 * s_max)?;
        let metric2 = build_metric(geom, &grid2)?;
        let f2 = solve_first_deformation(geom, &metric2, &solver)?;
        let v2 = solve_second_deformation(geom, &metric2, &f2, &solver)?;
        Some(((f2.a_decay - first.a_decay).abs(), (v2.a_decay - second.a_decay).abs()))
    } else {
        None
    };
    Ok(PipelineResult { metric, first, second, masses, scalar_crosscheck, s_max_shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collar::build_collar;
    use crate::corner::CornerMetric;
    use crate::mollifier::{mollify_path, MollifierConfig};

    fn flat_corner() -> SphericalCorner {
        SphericalCorner::new(
            3,
            2.0,
            RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
            RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn constants() {
        assert!((unit_sphere_volume(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_volume(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert_eq!(conformal_constant(3), 0.125);
    }

    #[test]
    fn scalar_curvature_of_closed_forms() {
        let c = flat_corner();
        let g = RadialGeometry::new(&c, None).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| 0.03 * i as f64).collect();
        let m = build_metric(&g, &grid).unwrap();
        assert!(spherical_scalar_curvature(&m).iter().all(|r| r.abs() < 1e-12));
        let sph = SphericalMetric {
            n_dim: 3,
            inner: InnerBoundary::Center,
            s_grid: grid.clone(),
            r: grid.iter().map(|s| s.sin()).collect(),
            dr: grid.iter().map(|s| s.cos()).collect(),
            ddr: grid.iter().map(|s| -s.sin()).collect(),
            scalar: vec![6.0; grid.len()],
            adm_mass_parameter: None,
        };
        assert!(spherical_scalar_curvature(&sph).iter().all(|r| (r - 6.0).abs() < 1e-9));
        let sw = SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap();
        let j = sw.jet(9.0).unwrap();
        assert!(radial_scalar_curvature(3, &j).abs() < 1e-12);
    }

    #[test]
    fn harmonic_first_solve_is_trivial() {
        let c = flat_corner();
        let g = RadialGeometry::new(&c, None).unwrap();
        let opts = GridOptions::default();
        let grid = radial_grid(&g, &opts, opts.s_max(&c).unwrap()).unwrap();
        let m = build_metric(&g, &grid).unwrap();
        let u = solve_first_deformation(&g, &m, &SolverOptions::default()).unwrap();
        assert!(u.sup_deviation < 1e-11, "{}", u.sup_deviation);
        assert!(u.a_decay.abs() < 1e-9 && u.a_integral.abs() < 1e-9);
        assert!(u.a_shooting.unwrap().abs() < 1e-9);
        let v = solve_second_deformation(&g, &m, &u, &SolverOptions::default()).unwrap();
        assert!(v.sup_deviation < 1e-11 && v.energy.abs() < 1e-10);
        let rep = masses(&m, &u, Some(&v), 1e-6).unwrap();
        assert!(rep.m_base.abs() < 1e-12 && rep.m_tilde.abs() < 1e-12 && rep.m_hat.unwrap().abs() < 1e-12);
    }

    #[test]
    fn identity_factor_leaves_metric_unchanged() {
        let c = flat_corner();
        let g = RadialGeometry::new(&c, None).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| 0.1 * i as f64).collect();
        let m = build_metric(&g, &grid).unwrap();
        let one = vec![1.0; grid.len()];
        let zero = vec![0.0; grid.len()];
        let t = conformal_metric(&m, &one, &zero, &zero).unwrap();
        assert_eq!(t.r, m.r);
        assert_eq!(t.dr, m.dr);
        assert_eq!(t.s_grid, m.s_grid);
    }

    #[test]
    fn harmonic_factor_shifts_mass_by_two_a() {
        let a = 0.3;
        let grid: Vec<f64> = (0..=2000).map(|i| 1.0 + 0.05 * i as f64).collect();
        let m = SphericalMetric {
            n_dim: 3,
            inner: InnerBoundary::Throat,
            s_grid: grid.clone(),
            r: grid.clone(),
            dr: vec![1.0; grid.len()],
            ddr: vec![0.0; grid.len()],
            scalar: vec![0.0; grid.len()],
            adm_mass_parameter: Some(0.0),
        };
        let u: Vec<f64> = grid.iter().map(|s| 1.0 + a / s).collect();
        let du: Vec<f64> = grid.iter().map(|s| -a / (s * s)).collect();
        let ddu: Vec<f64> = grid.iter().map(|s| 2.0 * a / (s * s * s)).collect();
        let t = conformal_metric(&m, &u, &du, &ddu).unwrap();
        let lim = hawking_mass_limit(&t, 1e-8).unwrap();
        assert!((lim.value - 2.0 * a).abs() < 1e-8);
        assert!(t.scalar.iter().all(|r| r.abs() < 1e-12));
        let direct = spherical_scalar_curvature(&t);
        assert!(direct.iter().all(|r| r.abs() < 1e-10));
    }

    #[test]
    fn schwarzschild_exterior_mass() {
        let c = SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap();
        let g = RadialGeometry::new(&c, None).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| 5.0 + 0.25 * i as f64).collect();
        let m = build_metric(&g, &grid).unwrap();
        let lim = hawking_mass_limit(&m, 1e-8).unwrap();
        assert!((lim.value - 0.5).abs() < 1e-10);
        assert!((exterior_tail(&c, 4.0).unwrap() - (1.0 - 0.75f64.sqrt()) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_in_schwarzschild_pipeline() {
        let c = SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap();
        let path = build_collar(&CornerMetric::Spherical(c), 1.0, 4000, 0).unwrap();
        let mol = mollify_path(&path, &MollifierConfig::new(0.05)).unwrap();
        let g = RadialGeometry::new(&c, Some(&mol)).unwrap();
        let res = run_pipeline(&g, &PipelineOptions::default()).unwrap();
        let f = &res.first;
        assert!((f.a_decay - f.a_integral).abs() <= 1e-6 * (1.0 + f.a_decay.abs()));
        assert!(res.masses.m_tilde >= -1e-6);
        assert!((res.masses.m_base - 0.5).abs() < 1e-9);
        assert!(res.second.max_u <= 1.0 && res.second.min_u > 0.0);
        assert!(res.second.energy > 0.0);
        let (da, db) = res.s_max_shift.unwrap();
        assert!(da < 1e-6 && db < 1e-6, "{da} {db}");
    }
}
