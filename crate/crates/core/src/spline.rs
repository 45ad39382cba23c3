//! Clamped cubic splines on a uniform grid, one spline per component.
//!
//! End slopes come from fourth-order one-sided differences, so the
//! interpolant reproduces cubics exactly. Evaluation at a knot returns the
//! stored sample bit-identically.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::linalg::solve_tridiagonal;
use crate::stencil::d1_onesided4;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct UniformSpline {
    t0: f64,
    h: f64,
    n: usize,
    dim: usize,
    /// `values[k * dim + c]`
    values: Vec<f64>,
    /// second derivatives, same layout
    curv: Vec<f64>,
}

/// Value, first and second derivative of a spline at a point.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl UniformSpline {
    /// `values` holds `n` samples of `dim` components each, at `t0 + k·h`.
    pub fn new(t0: f64, h: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::InvalidConfig("spline sample layout".into()));
        }
        let n = values.len() / dim;
        if n < 5 {
            return Err(Error::Stencil { index: n, reason: "spline side needs at least 5 nodes" });
        }
        if !(h > 0.0) {
            return Err(Error::InvalidConfig("spline spacing must be positive".into()));
        }
        let mut curv = vec![0.0; n * dim];
        let mut lower = vec![1.0; n];
        let mut diag = vec![4.0; n];
        let mut upper = vec![1.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        let mut rhs = vec![0.0; n];
        for c in 0..dim {
            let y = |k: usize| values[k * dim + c];
            let s0 = d1_onesided4([y(0), y(1), y(2), y(3), y(4)], h);
            let sn = d1_onesided4([y(n - 1), y(n - 2), y(n - 3), y(n - 4), y(n - 5)], -h);
            rhs[0] = 6.0 * ((y(1) - y(0)) / h - s0) / h;
            rhs[n - 1] = 6.0 * (sn - (y(n - 1) - y(n - 2)) / h) / h;
            for k in 1..n - 1 {
                rhs[k] = 6.0 * (y(k + 1) - 2.0 * y(k) + y(k - 1)) / (h * h);
            }
            let m = solve_tridiagonal(&lower, &diag, &upper, &rhs)
                .ok_or_else(|| Error::Geometry("spline system singular".into()))?;
            for k in 0..n {
                curv[k * dim + c] = m[k];
            }
        }
        Ok(UniformSpline { t0, h, n, dim, values, curv })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + (self.n - 1) as f64 * self.h
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn knot(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Interval index and local coordinate; clamps to the end intervals.
    #[inline]
    fn locate(&self, t: f64) -> (usize, f64) {
        let mut x = (t - self.t0) / self.h;
        let r = x.round();
        if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
            x = r;
        }
        let mut i = if x <= 0.0 { 0 } else { x as usize };
        if i >= self.n - 1 {
            i = self.n - 2;
        }
        (i, x - i as f64)
    }

    /// Writes the interpolated value of every component into `out`.
    pub fn value_into(&self, t: f64, out: &mut [f64]) {
        let (i, tau) = self.locate(t);
        let d = self.dim;
        if tau == 0.0 {
            out.copy_from_slice(&self.values[i * d..(i + 1) * d]);
            return;
        }
        if tau == 1.0 {
            out.copy_from_slice(&self.values[(i + 1) * d..(i + 2) * d]);
            return;
        }
        let (a, b) = (1.0 - tau, tau);
        let h2 = self.h * self.h / 6.0;
        let ca = (a * a * a - a) * h2;
        let cb = (b * b * b - b) * h2;
        for c in 0..d {
            out[c] = a * self.values[i * d + c]
                + b * self.values[(i + 1) * d + c]
                + ca * self.curv[i * d + c]
                + cb * self.curv[(i + 1) * d + c];
        }
    }

    pub fn d1_into(&self, t: f64, out: &mut [f64]) {
        let (i, tau) = self.locate(t);
        let d = self.dim;
        let (a, b) = (1.0 - tau, tau);
        let h6 = self.h / 6.0;
        for c in 0..d {
            out[c] = (self.values[(i + 1) * d + c] - self.values[i * d + c]) / self.h
                + h6 * (-(3.0 * a * a - 1.0) * self.curv[i * d + c]
                    + (3.0 * b * b - 1.0) * self.curv[(i + 1) * d + c]);
        }
    }

    pub fn d2_into(&self, t: f64, out: &mut [f64]) {
        let (i, tau) = self.locate(t);
        let d = self.dim;
        let (a, b) = (1.0 - tau, tau);
        for c in 0..d {
            out[c] = a * self.curv[i * d + c] + b * self.curv[(i + 1) * d + c];
        }
    }

    /// Value, first and second derivative in one pass. Agrees with the
    /// separate evaluators except at knots, where `value_into` copies.
    pub fn jet_into(&self, t: f64, v: &mut [f64], d1: &mut [f64], d2: &mut [f64]) {
        let (i, tau) = self.locate(t);
        let d = self.dim;
        let (a, b) = (1.0 - tau, tau);
        let h2 = self.h * self.h / 6.0;
        let (ca, cb) = ((a * a * a - a) * h2, (b * b * b - b) * h2);
        let h6 = self.h / 6.0;
        let (ea, eb) = (-(3.0 * a * a - 1.0) * h6, (3.0 * b * b - 1.0) * h6);
        let y0 = &self.values[i * d..(i + 1) * d];
        let y1 = &self.values[(i + 1) * d..(i + 2) * d];
        let k0 = &self.curv[i * d..(i + 1) * d];
        let k1 = &self.curv[(i + 1) * d..(i + 2) * d];
        for c in 0..d {
            v[c] = a * y0[c] + b * y1[c] + ca * k0[c] + cb * k1[c];
            d1[c] = (y1[c] - y0[c]) / self.h + ea * k0[c] + eb * k1[c];
            d2[c] = a * k0[c] + b * k1[c];
        }
    }

    /// Knots strictly inside `(lo, hi)`.
    pub fn knots_between(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let first = ((lo - self.t0) / self.h).floor().max(0.0) as usize;
        let mut k = first;
        while k < self.n {
            let tk = self.knot(k);
            if tk >= hi {
                break;
            }
            if tk > lo {
                out.push(tk);
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_and_derivatives() {
        let f = |t: f64| 1.0 - 0.5 * t + 2.0 * t * t - 0.7 * t * t * t;
        let n = 11;
        let vals: Vec<f64> = (0..n).flat_map(|k| {
            let t = -1.0 + 0.2 * k as f64;
            [f(t), 2.0 * f(t)]
        }).collect();
        let s = UniformSpline::new(-1.0, 0.2, 2, vals).unwrap();
        let mut v = [0.0; 2];
        for &t in &[-0.93, -0.1, 0.0, 0.37, 0.99] {
            s.value_into(t, &mut v);
            assert!((v[0] - f(t)).abs() < 1e-12, "t={t}");
            let (mut w, mut w1, mut w2) = ([0.0; 2], [0.0; 2], [0.0; 2]);
            s.jet_into(t, &mut w, &mut w1, &mut w2);
            assert!((w[1] - 2.0 * f(t)).abs() < 1e-12, "t={t}");
            assert!((v[1] - 2.0 * f(t)).abs() < 1e-12);
            s.d1_into(t, &mut v);
            assert!((v[0] - (-0.5 + 4.0 * t - 2.1 * t * t)).abs() < 1e-11);
            s.d2_into(t, &mut v);
            assert!((v[0] - (4.0 - 4.2 * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn knot_evaluation_is_bit_identical() {
        let vals: Vec<f64> = (0..9).map(|k| (0.3 * k as f64).sin()).collect();
        let s = UniformSpline::new(0.0, 0.3, 1, vals.clone()).unwrap();
        let mut v = [0.0];
        for k in 0..9 {
            s.value_into(s.knot(k), &mut v);
            assert_eq!(v[0], vals[k]);
        }
    }
}
