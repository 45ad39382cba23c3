//! Richardson extrapolation and convergence-order fits over parameter sweeps.

use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Outcome of extrapolating a sequence `f(h_i)` to `h = 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Extrapolation {
    pub limit: f64,
    /// Leading-order exponent used in the first elimination step.
    pub order: f64,
    /// Whether the order was estimated from the data rather than assumed.
    pub order_estimated: bool,
    /// `|limit - previous-level estimate|`, a crude error bar.
    pub error: f64,
    /// False if successive differences change sign or fail to shrink.
    pub monotone: bool,
}

/// Richardson table with exponents `orders[0], orders[1], ...` eliminated in
/// turn. `h` must be strictly decreasing (ideally geometric) and match
/// `values` in length.
pub fn richardson(h: &[f64], values: &[f64], orders: &[f64]) -> Result<(f64, f64)> {
    let n = h.len();
    if n != values.len() || n < 2 {
        return Err(Error::Extrapolation("need at least two matching samples"));
    }
    if h.windows(2).any(|w| !(w[1] < w[0]) || w[1] <= 0.0) {
        return Err(Error::Extrapolation("step sizes must be positive and strictly decreasing"));
    }
    let mut col: Vec<f64> = values.to_vec();
    let mut prev_best = values[n - 1];
    for j in 1..n {
        let p = orders.get(j - 1).copied().unwrap_or(j as f64);
        let mut next = Vec::with_capacity(n - j);
        for i in 0..n - j {
            let ratio = (h[i] / h[i + 1]).powf(p);
            next.push(col[i + 1] + (col[i + 1] - col[i]) / (ratio - 1.0));
        }
        prev_best = *col.last().unwrap_or(&prev_best);
        col = next;
    }
    let limit = col[0];
    Ok((limit, (limit - prev_best).abs()))
}

/// Order from three terms of a geometric sweep with constant ratio.
pub fn three_term_order(h: &[f64; 3], v: &[f64; 3]) -> Option<f64> {
    let a = v[0] - v[1];
    let b = v[1] - v[2];
    if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
        return None;
    }
    let r = h[0] / h[1];
    Some((a / b).abs().ln() / r.ln())
}

/// Extrapolates assuming a first-order leading term, replacing the assumed
/// order by the observed one when they disagree by more than `0.3`.
pub fn extrapolate_sweep(h: &[f64], values: &[f64], assumed_order: f64) -> Result<Extrapolation> {
    let n = values.len();
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = diffs.windows(2).all(|d| d[0] * d[1] >= 0.0 && d[1].abs() <= d[0].abs() * 1.000001 + 1e-300);
    let mut order = assumed_order;
    let mut estimated = false;
    if n >= 3 {
        let hh = [h[n - 3], h[n - 2], h[n - 1]];
        let vv = [values[n - 3], values[n - 2], values[n - 1]];
        if let Some(p) = three_term_order(&hh, &vv) {
            if (p - assumed_order).abs() > 0.3 && p > 0.2 && p < 6.0 {
                order = p;
                estimated = true;
            }
        }
    }
    let orders = [order, order + 1.0, order + 2.0];
    let (limit, error) = richardson(h, values, &orders)?;
    Ok(Extrapolation { limit, order, order_estimated: estimated, error, monotone })
}

/// Least-squares slope of `log|e|` against `log h`.
pub fn fit_order(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        h.iter().zip(e).filter(|(h, e)| **h > 0.0 && e.abs() > 0.0).map(|(h, e)| (h.ln(), e.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn removes_first_and_second_order_terms() {
        let h = [0.1, 0.05, 0.025];
        let f = |x: f64| 2.0 + 3.0 * x - 5.0 * x * x;
        let v: Vec<f64> = h.iter().map(|&x| f(x)).collect();
        let (l, _) = richardson(&h, &v, &[1.0, 2.0]).unwrap();
        assert!((l - 2.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(richardson(&[0.1, 0.1], &[1.0, 1.0], &[1.0]).is_err());
        assert!(richardson(&[0.1], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn detects_second_order_sequences() {
        let h = [0.1, 0.05, 0.025];
        let v: Vec<f64> = h.iter().map(|&x| 1.0 + x * x).collect();
        let e = extrapolate_sweep(&h, &v, 1.0).unwrap();
        assert!(e.order_estimated && (e.order - 2.0).abs() < 1e-12);
        assert!((e.limit - 1.0).abs() < 1e-13);
        assert!(e.monotone);
    }

    #[test]
    fn fitted_order_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x: &f64| 7.0 * x.powi(2)).collect();
        assert!((fit_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn exact_on_linear_models(a in -10.0f64..10.0, b in -10.0f64..10.0, ratio in 1.5f64..3.0) {
            let h = [0.2, 0.2 / ratio, 0.2 / (ratio * ratio)];
            let v: Vec<f64> = h.iter().map(|x| a + b * x).collect();
            let (l, _) = richardson(&h, &v, &[1.0, 2.0]).unwrap();
            prop_assert!((l - a).abs() < 1e-10 * (1.0 + a.abs() + b.abs()));
        }
    }
}
