//! The smoothing kernel `φ` and the bandwidth cutoff `σ`.
//!
//! Both are built from the primitive `f(x) = exp(-1/x)` (`x > 0`):
//! `φ(t) ∝ exp(-1/(1 - t²))` on `(-1, 1)`, normalized to unit mass, and `σ` is
//! a plateau of height `h` on `|t| < 1/4` falling smoothly to zero at
//! `|t| = 1/2` through the smooth step `f(x) / (f(x) + f(1 - x))`.

#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::quadrature::AdaptiveRule;

/// Default plateau height of the cutoff.
pub const PLATEAU: f64 = 0.01;

#[inline]
fn bump_primitive(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Even, compactly supported kernel on `[-1, 1]` with unit integral.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    norm: f64,
}

impl Mollifier {
    pub fn new() -> Self {
        let raw = |t: f64| if t.abs() < 1.0 { (-1.0 / (1.0 - t * t)).exp() } else { 0.0 };
        let (mass, _) = AdaptiveRule::default()
            .integrate_split(&[-1.0, -0.5, 0.0, 0.5, 1.0], 1e-16, raw)
            .expect("kernel normalization");
        Mollifier { norm: 1.0 / mass }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            self.norm * (-1.0 / (1.0 - t * t)).exp()
        }
    }

    /// Normalization constant `1 / ∫ exp(-1/(1-t²)) dt`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// The rescaled kernel `(1/w) φ(t/w)`; unit mass for every `w > 0`.
    #[inline]
    pub fn scaled(&self, t: f64, w: f64) -> f64 {
        self.eval(t / w) / w
    }
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::new()
    }
}

/// Smooth plateau cutoff supported in `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub plateau: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { plateau: PLATEAU }
    }
}

/// `(S, S', S'')` of the smooth step at `x`.
fn smooth_step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let y = 1.0 - x;
    let a = bump_primitive(x);
    let b = bump_primitive(y);
    let a1 = a / (x * x);
    let b1 = -b / (y * y);
    let a2 = a * (1.0 - 2.0 * x) / (x * x * x * x);
    let b2 = b * (1.0 - 2.0 * y) / (y * y * y * y);
    let s = a + b;
    let num1 = a1 * b - a * b1;
    let step = a / s;
    let d1 = num1 / (s * s);
    let d2 = ((a2 * b - a * b2) * s - 2.0 * num1 * (a1 + b1)) / (s * s * s);
    (step, d1, d2)
}

impl Cutoff {
    /// `(σ, σ', σ'')` at `t`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let x = 4.0 * (0.5 - t.abs());
        let (s, s1, s2) = smooth_step(x);
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        // dx/dt = -4 sgn(t)
        (self.plateau * s, self.plateau * s1 * (-4.0 * sign), self.plateau * s2 * 16.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.jet(t).0
    }
}

/// Position-dependent bandwidth `σ_δ(t) = δ² σ(t/δ)` with its derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Bandwidth {
    pub delta: f64,
    pub cutoff: Cutoff,
}

impl Bandwidth {
    pub fn new(delta: f64, cutoff: Cutoff) -> Self {
        Bandwidth { delta, cutoff }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.delta * self.delta * self.cutoff.eval(t / self.delta)
    }

    /// `(σ_δ(t), σ'(t/δ), σ''(t/δ))`: the bandwidth and the cutoff derivatives
    /// at the rescaled point, the combination the derivative formulas use.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let (s, s1, s2) = self.cutoff.jet(t / self.delta);
        (self.delta * self.delta * s, s1, s2)
    }

    /// Inner half-width `δ² · plateau` of the constant-bandwidth band.
    pub fn inner_width(&self) -> f64 {
        self.delta * self.delta * self.cutoff.plateau
    }
}
