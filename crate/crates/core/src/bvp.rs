//! Radial boundary-value problems `(P u')' = W V u` on `[x_0, x_N]`.
//!
//! The inner end carries zero flux (regular center or reflection-symmetric
//! throat). Beyond `x_N` the potential vanishes and the solution is the
//! harmonic extension `u = 1 - F J(x)` with `F = P u'` and `J = ∫_x^∞ dx/P`,
//! which gives the exact Robin condition `u_N + F_N J_N = 1`.
//!
//! Two independent solvers: a node-centered finite-volume scheme with a
//! tridiagonal solve, and an adaptive Dormand–Prince integrator used for
//! shooting.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::linalg::solve_tridiagonal;
use crate::{Error, Result};

/// Discrete radial problem: fluxes live on interval midpoints, volume
/// weights are integrated over the dual cells `[x_{i-½}, x_{i+½}]` (half
/// cells at both ends).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    pub x: Vec<f64>,
    /// `P` at the midpoints, `x.len() - 1` values.
    pub p_mid: Vec<f64>,
    /// `∫ W dx` over each dual cell.
    pub w_cell: Vec<f64>,
    /// Potential `V` at the nodes.
    pub v: Vec<f64>,
    /// Exterior integral `J_N = ∫_{x_N}^∞ dx/P`.
    pub tail: f64,
}

impl RadialOperator {
    /// Midpoint and cell values from nodal `P` and `W` by averaging and the
    /// trapezoid rule. Inaccurate next to a center where `P, W → 0`.
    pub fn from_nodes(x: &[f64], p: &[f64], w: &[f64], v: &[f64], tail: f64) -> Self {
        let n = x.len();
        let p_mid = (0..n.saturating_sub(1)).map(|i| 0.5 * (p[i] + p[i + 1])).collect();
        let w_cell = (0..n)
            .map(|i| {
                let left = if i > 0 { 0.5 * (x[i] - x[i - 1]) } else { 0.0 };
                let right = if i + 1 < n { 0.5 * (x[i + 1] - x[i]) } else { 0.0 };
                w.get(i).copied().unwrap_or(0.0) * (left + right)
            })
            .collect();
        RadialOperator { x: x.to_vec(), p_mid, w_cell, v: v.to_vec(), tail }
    }

    /// `P = a(x) r(x)^{n-1}` and `W = b(x) r(x)^{n-1}` with `r` available
    /// everywhere and the smooth factors `a`, `b` only at the nodes. The
    /// `r^{n-1}` part is integrated by Simpson's rule on each half cell.
    pub fn from_radius(
        x: &[f64],
        dim: usize,
        mut r: impl FnMut(f64) -> Result<f64>,
        a: &[f64],
        b: &[f64],
        v: &[f64],
        tail: f64,
    ) -> Result<Self> {
        let n = x.len();
        let e = dim as i32 - 1;
        let mut p_mid = Vec::with_capacity(n.saturating_sub(1));
        let mut half = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n.saturating_sub(1) {
            let (x0, x1) = (x[i], x[i + 1]);
            let h = x1 - x0;
            let r0 = r(x0)?.powi(e);
            let rq1 = r(x0 + 0.25 * h)?.powi(e);
            let rm = r(x0 + 0.5 * h)?.powi(e);
            let rq3 = r(x0 + 0.75 * h)?.powi(e);
            let r1 = r(x1)?.powi(e);
            p_mid.push(0.5 * (a[i] + a[i + 1]) * rm);
            half.push(((h / 12.0) * (r0 + 4.0 * rq1 + rm), (h / 12.0) * (rm + 4.0 * rq3 + r1)));
        }
        let w_cell = (0..n)
            .map(|i| {
                let left = if i > 0 { half[i - 1].1 } else { 0.0 };
                let right = if i + 1 < n { half[i].0 } else { 0.0 };
                b[i] * (left + right)
            })
            .collect();
        Ok(RadialOperator { x: x.to_vec(), p_mid, w_cell, v: v.to_vec(), tail })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub u: Vec<f64>,
    /// `u - 1`, computed directly.
    pub deviation: Vec<f64>,
    /// Flux `P u'` interpolated to the nodes.
    pub flux: Vec<f64>,
    /// Flux across the outer boundary.
    pub flux_out: f64,
    /// Discrete `∫ (P u'² + W V u²) dx` including the exterior tail.
    pub energy: f64,
    /// Relative residual of the linear system at the returned solution.
    pub residual: f64,
}

const RESIDUAL_TOL: f64 = 1e-9;

fn validate(op: &RadialOperator) -> Result<usize> {
    let n = op.x.len();
    if n < 3 || op.p_mid.len() + 1 != n || op.w_cell.len() != n || op.v.len() != n {
        return Err(Error::InvalidConfig("radial operator arrays do not match the grid".into()));
    }
    if op.x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("radial grid must be strictly increasing".into()));
    }
    if !(op.tail > 0.0) || !op.tail.is_finite() {
        return Err(Error::InvalidConfig("exterior integral must be positive and finite".into()));
    }
    Ok(n)
}

/// Finite-volume solve on the (possibly non-uniform) grid `op.x`. The unknown
/// is `w = u - 1`, so a nearly harmonic `u` keeps full relative accuracy in
/// its deviation from 1.
pub fn solve_fd(op: &RadialOperator) -> Result<FdSolution> {
    let n = validate(op)?;
    let h: Vec<f64> = op.x.windows(2).map(|w| w[1] - w[0]).collect();
    let pm = &op.p_mid;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let src = op.w_cell[i] * op.v[i];
        if i > 0 {
            lower[i] = pm[i - 1] / h[i - 1];
        }
        if i + 1 < n {
            upper[i] = pm[i] / h[i];
        }
        diag[i] = -lower[i] - upper[i] - src;
        rhs[i] = src;
    }
    diag[n - 1] -= 1.0 / op.tail;
    let w = solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or(Error::Solver { residual: f64::INFINITY })?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = f64::MIN_POSITIVE;
    for i in 0..n {
        let mut r = diag[i] * w[i] - rhs[i];
        let mut s = (diag[i] * w[i]).abs() + rhs[i].abs();
        if i > 0 {
            r += lower[i] * w[i - 1];
            s += (lower[i] * w[i - 1]).abs();
        }
        if i + 1 < n {
            r += upper[i] * w[i + 1];
            s += (upper[i] * w[i + 1]).abs();
        }
        worst = worst.max(r.abs());
        scale = scale.max(s);
    }
    let residual = worst / scale;
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Solver { residual });
    }
    let mid: Vec<f64> = (0..n - 1).map(|i| pm[i] * (w[i + 1] - w[i]) / h[i]).collect();
    let flux_out = -w[n - 1] / op.tail;
    let mut flux = vec![0.0; n];
    for i in 1..n - 1 {
        let theta = h[i - 1] / (h[i - 1] + h[i]);
        flux[i] = mid[i - 1] + (mid[i] - mid[i - 1]) * theta;
    }
    flux[n - 1] = flux_out;
    let mut energy = flux_out * flux_out * op.tail;
    for i in 0..n - 1 {
        energy += mid[i] * (w[i + 1] - w[i]);
    }
    for i in 0..n {
        energy += op.w_cell[i] * op.v[i] * (1.0 + w[i]) * (1.0 + w[i]);
    }
    let u = w.iter().map(|x| 1.0 + x).collect();
    Ok(FdSolution { u, deviation: w, flux, flux_out, energy, residual })
}

/// Solves on `x` and on its bisection, and combines the two nodewise as
/// `u_f + (u_f - u_c)/3`, removing the `h²` term. Node fluxes, the boundary
/// flux and the energy are extrapolated the same way.
pub fn solve_fd_richardson(x: &[f64], mut build: impl FnMut(&[f64]) -> Result<RadialOperator>) -> Result<FdSolution> {
    let coarse = solve_fd(&build(x)?)?;
    let fine_x = bisect_grid(x);
    let fine = solve_fd(&build(&fine_x)?)?;
    let ex = |f: f64, c: f64| f + (f - c) / 3.0;
    let deviation: Vec<f64> = (0..x.len()).map(|i| ex(fine.deviation[2 * i], coarse.deviation[i])).collect();
    let u = deviation.iter().map(|x| 1.0 + x).collect();
    let flux = (0..x.len()).map(|i| ex(fine.flux[2 * i], coarse.flux[i])).collect();
    Ok(FdSolution {
        u,
        deviation,
        flux,
        flux_out: ex(fine.flux_out, coarse.flux_out),
        energy: ex(fine.energy, coarse.energy),
        residual: coarse.residual.max(fine.residual),
    })
}

/// Inserts the midpoint of every interval.
pub fn bisect_grid(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * x.len());
    for w in x.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = x.last() {
        out.push(last);
    }
    out
}

/// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Step-size control for [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance { rtol: 1e-11, atol: 1e-14, max_steps: 2_000_000 }
    }
}

/// Integrates `y' = f(x, y)` from `x0` and records the state at every entry
/// of the increasing list `stops`. Steps never straddle a stop, so stops
/// double as breakpoints of the right-hand side.
pub fn dopri5(
    mut f: impl FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    x0: f64,
    y0: &[f64],
    stops: &[f64],
    tol: OdeTolerance,
) -> Result<Vec<Vec<f64>>> {
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut x = x0;
    let mut out = Vec::with_capacity(stops.len());
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut h = match stops.first() {
        Some(&s) => ((s - x0).abs() * 1e-3).max(1e-12),
        None => return Ok(out),
    };
    let mut steps = 0usize;
    for &stop in stops {
        if stop < x {
            return Err(Error::InvalidConfig("integration stops must be increasing".into()));
        }
        while x < stop {
            if steps >= tol.max_steps {
                return Err(Error::Solver { residual: f64::INFINITY });
            }
            steps += 1;
            let last = x + h >= stop;
            let hs = if last { stop - x } else { h };
            f(x, &y, &mut k[0])?;
            for s in 1..7 {
                for d in 0..dim {
                    let mut acc = y[d];
                    for j in 0..s {
                        acc += hs * A[s][j] * k[j][d];
                    }
                    tmp[d] = acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                f(x + C[s] * hs, &tmp, &mut tail[0])?;
            }
            let mut err: f64 = 0.0;
            for d in 0..dim {
                let mut acc5 = y[d];
                let mut e = 0.0;
                for j in 0..7 {
                    acc5 += hs * B5[j] * k[j][d];
                    e += hs * (B5[j] - B4[j]) * k[j][d];
                }
                y5[d] = acc5;
                let sc = tol.atol + tol.rtol * y[d].abs().max(acc5.abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::Solver { residual: f64::INFINITY });
            }
            if err <= 1.0 {
                x = if last { stop } else { x + hs };
                y.copy_from_slice(&y5);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let next = hs * factor;
            // keep the free step size when the last step was clipped by a stop
            h = if last && err <= 1.0 { h.max(next) } else { next };
            if h < 1e-15 * (1.0 + x.abs()) {
                return Err(Error::Solver { residual: err });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// How a shooting integration leaves the inner end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShootStart {
    /// Regular center of a `dim`-dimensional ball, started from the
    /// two-term series at `x[0] + offset`.
    Center { dim: usize, offset: f64 },
    /// Zero flux at `x[0]`.
    Throat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotSolution {
    pub u: Vec<f64>,
    pub flux: Vec<f64>,
    pub flux_out: f64,
    /// Factor that turned the unit-start solution into `u_N + F_N J = 1`.
    pub scale: f64,
}

/// Shooting for a chain of `levels` radial problems whose coefficients may
/// depend on the solutions of earlier levels. `coef(x, y, out)` fills
/// `out[k] = [P, W, V]` for every level `k` present in `y`, where
/// `y = [u_0, F_0, u_1, F_1, ...]`; `tail(k, y_N)` is `J_N` for level `k`.
/// Every grid node is a stop, so coefficient breakpoints belong on the grid.
pub fn shoot(
    x: &[f64],
    levels: usize,
    start: ShootStart,
    coef: impl Fn(f64, &[f64], &mut [[f64; 3]]) -> Result<()>,
    tail: impl Fn(usize, &[f64]) -> f64,
    tol: OdeTolerance,
) -> Result<Vec<ShotSolution>> {
    if x.len() < 3 || x.windows(2).any(|w| !(w[1] > w[0])) || levels == 0 {
        return Err(Error::InvalidConfig("shooting needs an increasing grid and at least one level".into()));
    }
    let (x0, dim) = match start {
        ShootStart::Center { dim, offset } => {
            if !(offset > 0.0 && x[0] + offset < x[1]) {
                return Err(Error::InvalidConfig("series offset must land before the second node".into()));
            }
            (x[0] + offset, dim as f64)
        }
        ShootStart::Throat => (x[0], 0.0),
    };
    let mut scales: Vec<f64> = Vec::with_capacity(levels);
    let mut coefs = vec![[0.0; 3]; levels];
    let mut last: Vec<Vec<f64>> = Vec::new();
    for active in 1..=levels {
        let mut y0 = vec![0.0; 2 * active];
        for k in 0..active {
            coef(x0, &y0[..2 * k + 2], &mut coefs[..k + 1])?;
            let [p, w, v] = coefs[k];
            let a = if k < scales.len() { scales[k] } else { 1.0 };
            if dim > 0.0 {
                let ratio = w / p;
                y0[2 * k] = a * (1.0 + ratio * v * x0 * x0 / (2.0 * dim));
                y0[2 * k + 1] = a * p * ratio * v * x0 / dim;
            } else {
                y0[2 * k] = a;
                y0[2 * k + 1] = 0.0;
            }
        }
        let mut cbuf = vec![[0.0; 3]; active];
        let states = dopri5(
            |xs, y, d| {
                coef(xs, y, &mut cbuf)?;
                for k in 0..active {
                    let [p, w, v] = cbuf[k];
                    d[2 * k] = y[2 * k + 1] / p;
                    d[2 * k + 1] = w * v * y[2 * k];
                }
                Ok(())
            },
            x0,
            &y0,
            &x[1..],
            tol,
        )?;
        let fin = &states[states.len() - 1];
        let k = active - 1;
        let denom = fin[2 * k] + fin[2 * k + 1] * tail(k, fin);
        if !(denom.abs() > 0.0) || !denom.is_finite() {
            return Err(Error::Solver { residual: f64::INFINITY });
        }
        scales.push(1.0 / denom);
        let mut first = y0.clone();
        if dim > 0.0 {
            for k in 0..active {
                let a = if k < scales.len() - 1 { scales[k] } else { 1.0 };
                first[2 * k] = a;
                first[2 * k + 1] = 0.0;
            }
        }
        last = core::iter::once(first).chain(states).collect();
    }
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let f = if k + 1 == levels { scales[k] } else { 1.0 };
        let u: Vec<f64> = last.iter().map(|y| f * y[2 * k]).collect();
        let flux: Vec<f64> = last.iter().map(|y| f * y[2 * k + 1]).collect();
        let flux_out = flux[flux.len() - 1];
        out.push(ShotSolution { u, flux, flux_out, scale: scales[k] });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::Manufactured;

    #[test]
    fn dopri5_exponential_and_oscillator() {
        let stops = [0.5, 1.0, 2.0];
        let r = dopri5(
            |_, y, d| {
                d[0] = y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            &stops,
            OdeTolerance::default(),
        )
        .unwrap();
        for (s, y) in stops.iter().zip(&r) {
            assert!((y[0] - s.exp()).abs() < 1e-9 * s.exp());
        }
        let r = dopri5(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            &[0.0, 1.0],
            &[10.0],
            OdeTolerance::default(),
        )
        .unwrap();
        assert!((r[0][0] - 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_flat_problem_is_exactly_one() {
        let x: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let p: Vec<f64> = x.iter().map(|s| s * s).collect();
        let v = vec![0.0; x.len()];
        let op = RadialOperator::from_nodes(&x, &p, &p, &v, 1.0 / 5.0);
        let s = solve_fd(&op).unwrap();
        assert!(s.u.iter().all(|u| (u - 1.0).abs() < 1e-13));
        assert!(s.flux_out.abs() < 1e-12 && s.energy.abs() < 1e-12);
    }

    #[test]
    fn point_charge_shell_matches_closed_form() {
        // (s² u')' = s² V u with V = -λ on [0, 1]; exact u = a sin(k s)/(k s) inside.
        let lam: f64 = 0.5;
        let k = lam.sqrt();
        let n = 3000;
        let x: Vec<f64> = (0..=n).map(|i| 3.0 * i as f64 / n as f64).collect();
        let p: Vec<f64> = x.iter().map(|s| s * s).collect();
        let v: Vec<f64> = x.iter().map(|&s| if s < 1.0 { -lam } else if s == 1.0 { -0.5 * lam } else { 0.0 }).collect();
        let op = RadialOperator::from_nodes(&x, &p, &p, &v, 1.0 / 3.0);
        let sol = solve_fd(&op).unwrap();
        // exact: inside a·sinc, outside 1 + A/s, C¹ matching at s = 1
        let f = (k).sin() / k;
        let df = ((k).cos() * k - (k).sin()) / k;
        // a f = 1 + A, a df = -A
        let a = 1.0 / (f + df);
        let big_a = -a * df;
        let u_out = 1.0 + big_a / 3.0;
        assert!((sol.u[n] - u_out).abs() < 1e-5, "{} vs {u_out}", sol.u[n]);
        assert!((sol.flux_out + big_a).abs() < 1e-5);
        // the discrete energy identity: E = F_N (u_N + F_N J) = F_N
        assert!((sol.energy - sol.flux_out).abs() < 1e-10, "{} {}", sol.energy, sol.flux_out);
    }

    #[test]
    fn manufactured_fd_second_order() {
        for a in [3.0, -3.0] {
            let m = Manufactured { a };
            let e: Vec<f64> = [375, 750, 1500, 3000]
                .iter()
                .map(|&n| {
                    let x = Manufactured::uniform(n);
                    m.error(&x, &solve_fd(&m.operator(&x).unwrap()).unwrap().u)
                })
                .collect();
            for w in e.windows(2) {
                assert!(w[0] / w[1] > 3.9, "{e:?}");
            }
            let x = Manufactured::uniform(3000);
            let r = solve_fd_richardson(&x, |g| m.operator(g)).unwrap();
            assert!(m.error(&x, &r.u) < 1e-8, "{e:?} {}", m.error(&x, &r.u));
            assert!((r.flux_out + m.decay()).abs() < 1e-8 * m.decay().abs());
        }
    }

    #[test]
    fn manufactured_shooting() {
        for a in [3.0, -3.0] {
            let m = Manufactured { a };
            let x: Vec<f64> = (0..=300).map(|i| 3.0 * i as f64 / 300.0).collect();
            let sol = shoot(
                &x,
                1,
                ShootStart::Center { dim: 3, offset: 1e-5 },
                |s, _, out| {
                    out[0] = [s * s, s * s, m.v(s)];
                    Ok(())
                },
                |_, _| 1.0 / 3.0,
                OdeTolerance::default(),
            )
            .unwrap();
            let sol = &sol[0];
            for (&s, u) in x.iter().zip(&sol.u) {
                assert!(((u - m.u(s)) / m.u(s)).abs() < 1e-8, "{s} {u}");
            }
            assert!((sol.flux_out + m.decay()).abs() < 1e-8 * m.decay().abs());
        }
    }

    #[test]
    fn two_level_shooting_matches_sequential_fd() {
        // level 1 uses u_0² as its flux weight, the structure of the second deformation
        let n = 4000;
        let x: Vec<f64> = (0..=n).map(|i| 3.0 * i as f64 / n as f64).collect();
        let m = Manufactured { a: -2.0 };
        let pot = |s: f64| if s < 1.0 { 0.4 * (1.0 - s * s).powi(2) } else { 0.0 };
        let sols = shoot(
            &x,
            2,
            ShootStart::Center { dim: 3, offset: 1e-5 },
            |s, y, out| {
                out[0] = [s * s, s * s, m.v(s)];
                if out.len() > 1 {
                    let u = y[0];
                    out[1] = [u * u * s * s, u.powi(6) * s * s, pot(s)];
                }
                Ok(())
            },
            |k, y| if k == 0 { 1.0 / 3.0 } else { 1.0 / (3.0 * y[0]) },
            OdeTolerance::default(),
        )
        .unwrap();
        let u0: Vec<f64> = x.iter().map(|&s| m.u(s)).collect();
        for (a, b) in sols[0].u.iter().zip(&u0) {
            assert!((a - b).abs() < 1e-9);
        }
        let v: Vec<f64> = x.iter().map(|&s| pot(s)).collect();
        let a: Vec<f64> = u0.iter().map(|u| u * u).collect();
        let b: Vec<f64> = u0.iter().map(|u| u.powi(6)).collect();
        let op = RadialOperator::from_radius(&x, 3, |s| Ok(s), &a, &b, &v, 1.0 / (3.0 * u0[n])).unwrap();
        let fd = solve_fd(&op).unwrap();
        for (a, b) in sols[1].u.iter().zip(&fd.u) {
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
        assert!(sols[1].u.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn bisection_keeps_nodes() {
        let g = bisect_grid(&[0.0, 1.0, 3.0]);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 2.0, 3.0]);
    }
}
