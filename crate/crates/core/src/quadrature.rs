//! Gauss–Legendre rules and a panel-adaptive integrator for vector integrands.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fixed-rule integral of a scalar function over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Pushes mapped nodes/weights of `[a, b]` onto a plan.
    pub fn push_mapped(&self, a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            nodes.push(c + h * x);
            weights.push(w * h);
        }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Embedded pair of Gauss–Legendre rules used for error estimation.
#[derive(Debug, Clone)]
pub struct AdaptiveRule {
    pub coarse: GaussLegendre,
    pub fine: GaussLegendre,
    pub max_depth: usize,
}

impl Default for AdaptiveRule {
    fn default() -> Self {
        AdaptiveRule { coarse: GaussLegendre::new(10), fine: GaussLegendre::new(20), max_depth: 40 }
    }
}

/// Result of an adaptive integration: value, error estimate, accepted panels.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub value: Vec<f64>,
    pub error: f64,
    pub panels: Vec<(f64, f64)>,
}

impl AdaptiveRule {
    /// Integrates a vector-valued integrand of dimension `dim` over `[a, b]`,
    /// subdividing until each panel's coarse/fine difference is below
    /// `tol · width / (b - a)` in every component.
    pub fn integrate_vec(
        &self,
        a: f64,
        b: f64,
        dim: usize,
        tol: f64,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Result<Adaptive> {
        let mut value = vec![0.0; dim];
        let mut panels = Vec::new();
        let mut error = 0.0;
        if b == a {
            return Ok(Adaptive { value, error, panels });
        }
        let span = (b - a).abs();
        let mut tmp = vec![0.0; dim];
        let mut coarse = vec![0.0; dim];
        let mut fine = vec![0.0; dim];
        let mut stack: Vec<(f64, f64, usize)> = vec![(a, b, 0)];
        let mut failed = false;
        while let Some((lo, hi, depth)) = stack.pop() {
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            coarse.iter_mut().for_each(|v| *v = 0.0);
            fine.iter_mut().for_each(|v| *v = 0.0);
            for (x, w) in self.coarse.nodes.iter().zip(&self.coarse.weights) {
                f(c + h * x, &mut tmp);
                for k in 0..dim {
                    coarse[k] += w * h * tmp[k];
                }
            }
            for (x, w) in self.fine.nodes.iter().zip(&self.fine.weights) {
                f(c + h * x, &mut tmp);
                for k in 0..dim {
                    fine[k] += w * h * tmp[k];
                }
            }
            let err = coarse.iter().zip(&fine).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            let local_tol = tol * (hi - lo).abs() / span;
            if err <= local_tol || depth >= self.max_depth {
                if err > local_tol {
                    failed = true;
                }
                for k in 0..dim {
                    value[k] += fine[k];
                }
                error += err;
                panels.push((lo, hi));
            } else {
                stack.push((c, hi, depth + 1));
                stack.push((lo, c, depth + 1));
            }
        }
        if failed && error > tol {
            return Err(Error::Quadrature { estimate: error, tol });
        }
        panels.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(core::cmp::Ordering::Equal));
        Ok(Adaptive { value, error, panels })
    }

    pub fn integrate(&self, a: f64, b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> Result<(f64, f64)> {
        let r = self.integrate_vec(a, b, 1, tol, |x, out| out[0] = f(x))?;
        Ok((r.value[0], r.error))
    }

    /// Adaptive integral over consecutive breakpoint intervals.
    pub fn integrate_split(&self, breaks: &[f64], tol: f64, mut f: impl FnMut(f64) -> f64) -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut err = 0.0;
        let n = breaks.len().saturating_sub(1).max(1) as f64;
        for w in breaks.windows(2) {
            let (v, e) = self.integrate(w[0], w[1], tol / n, &mut f)?;
            total += v;
            err += e;
        }
        Ok((total, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        // degree 15 exact
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = (2.0f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        let wsum: f64 = gl.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kink() {
        let rule = AdaptiveRule::default();
        let (v, _) = rule.integrate(-1.0, 2.0, 1e-12, |x| x.abs()).unwrap();
        assert!((v - 2.5).abs() < 1e-11);
    }

    #[test]
    fn split_integration_of_gaussian() {
        let rule = AdaptiveRule::default();
        let (v, _) = rule
            .integrate_split(&[-8.0, -1.0, 0.0, 1.0, 8.0], 1e-13, |x| (-x * x).exp())
            .unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }
}
