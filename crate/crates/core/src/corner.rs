//! Metrics with a corner along `Σ`: the two sides in Gaussian collar form.

#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::linalg::Sym2;
use crate::profile::{RadialJet, RadialProfile};
use crate::{Error, Result};

/// Side of the corner. `Minus` is the bounded region (`t ≤ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    Minus,
    Plus,
}

/// How the radial domain ends at `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InnerBoundary {
    /// Smooth center, `r(0) = 0`, `r'(0) = 1`.
    Center,
    /// Minimal sphere with reflection symmetry (zero flux).
    Throat,
}

/// Spherically symmetric corner metric: `inner` on `[0, corner_s]`, `outer` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SphericalCorner {
    pub ambient_dim: usize,
    /// Proper distance of `Σ` from the inner end.
    pub corner_s: f64,
    pub inner: RadialProfile,
    pub outer: RadialProfile,
}

impl SphericalCorner {
    pub fn new(ambient_dim: usize, corner_s: f64, inner: RadialProfile, outer: RadialProfile) -> Result<Self> {
        if ambient_dim < 3 {
            return Err(Error::InvalidConfig("ambient dimension must be at least 3".into()));
        }
        if ambient_dim != 3 && (inner.three_dimensional_only() || outer.three_dimensional_only()) {
            return Err(Error::InvalidConfig("Schwarzschild profiles are three-dimensional".into()));
        }
        if !(corner_s > 0.0) {
            return Err(Error::InvalidConfig("corner must sit at positive proper distance".into()));
        }
        Ok(SphericalCorner { ambient_dim, corner_s, inner, outer })
    }

    /// Flat ball of areal radius `radius` glued to a Schwarzschild exterior of `mass`.
    pub fn flat_in_schwarzschild(radius: f64, mass: f64) -> Result<Self> {
        Self::new(
            3,
            radius,
            RadialProfile::Flat { anchor_s: 0.0, anchor_r: 0.0 },
            RadialProfile::Schwarzschild { mass, anchor_s: radius, anchor_r: radius },
        )
    }

    pub fn profile(&self, side: Side) -> &RadialProfile {
        match side {
            Side::Minus => &self.inner,
            Side::Plus => &self.outer,
        }
    }

    /// Radial jet of one side at collar coordinate `t` (`s = corner_s + t`).
    pub fn side_jet(&self, side: Side, t: f64) -> Result<RadialJet> {
        self.profile(side).jet(self.corner_s + t)
    }

    /// Radial jet of the glued metric at proper distance `s`.
    pub fn jet(&self, s: f64) -> Result<RadialJet> {
        if s <= self.corner_s {
            self.inner.jet(s)
        } else {
            self.outer.jet(s)
        }
    }

    /// Closed-form mean curvature of `Σ` from one side, outward normal.
    pub fn mean_curvature(&self, side: Side) -> Result<f64> {
        let j = self.side_jet(side, 0.0)?;
        Ok((self.ambient_dim - 1) as f64 * j.dr / j.r)
    }

    pub fn inner_boundary(&self) -> Result<InnerBoundary> {
        match self.inner {
            RadialProfile::SchwarzschildThroat { .. } => Ok(InnerBoundary::Throat),
            _ => {
                let j = self.inner.jet(0.0)?;
                if j.r.abs() < 1e-12 && (j.dr - 1.0).abs() < 1e-9 {
                    Ok(InnerBoundary::Center)
                } else {
                    Err(Error::Geometry("inner profile has neither a smooth center nor a throat".into()))
                }
            }
        }
    }

    pub fn exterior_mass(&self) -> Option<f64> {
        self.outer.exterior_mass()
    }
}

/// Parameters of the torus collar family
/// `γ± = e^{2φ(x)} [(1 + k±(x) t + c t²) δ + t² b(x)]`, `φ = a cos x¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TorusCorner {
    pub n: usize,
    /// conformal amplitude `a`
    pub amplitude: f64,
    /// `k₋ = k_minus[0] + k_minus[1] sin x²`
    pub k_minus: [f64; 2],
    /// `k₊ = k_plus[0] + k_plus[1] cos x¹`
    pub k_plus: [f64; 2],
    /// isotropic quadratic coefficient `c`
    pub quadratic: f64,
    /// amplitude of the trace-free-ish quadratic shear `b`
    pub shear: f64,
}

impl TorusCorner {
    pub fn kinked(n: usize) -> Self {
        TorusCorner { n, amplitude: 0.1, k_minus: [0.3, 0.1], k_plus: [0.1, 0.05], quadratic: 0.05, shear: 0.05 }
    }

    /// Same family with `k₋ = k₊`, smooth across `t = 0`.
    pub fn smooth(n: usize) -> Self {
        let mut c = Self::kinked(n);
        c.k_minus = [0.2, 0.0];
        c.k_plus = [0.2, 0.0];
        c
    }

    fn rate(&self, side: Side, x1: f64, x2: f64) -> f64 {
        match side {
            Side::Minus => self.k_minus[0] + self.k_minus[1] * x2.sin(),
            Side::Plus => self.k_plus[0] + self.k_plus[1] * x1.cos(),
        }
    }

    /// Closed-form mean curvature of `Σ` from one side: `H± = k±(x)`.
    pub fn mean_curvature(&self, side: Side, x1: f64, x2: f64) -> f64 {
        self.rate(side, x1, x2)
    }

    /// `(γ, ∂_t γ, ∂²_t γ)` of one side at `(x, t)`.
    pub fn metric_jet(&self, side: Side, x1: f64, x2: f64, t: f64) -> (Sym2, Sym2, Sym2) {
        let e = (2.0 * self.amplitude * x1.cos()).exp();
        let k = self.rate(side, x1, x2);
        let c = self.quadratic;
        let b = [self.shear * x2.cos(), self.shear * (x1 + x2).sin(), -self.shear * x1.cos()];
        let iso = 1.0 + k * t + c * t * t;
        let g = [e * (iso + t * t * b[0]), e * t * t * b[1], e * (iso + t * t * b[2])];
        let diso = k + 2.0 * c * t;
        let g1 = [e * (diso + 2.0 * t * b[0]), e * 2.0 * t * b[1], e * (diso + 2.0 * t * b[2])];
        let g2 = [e * (2.0 * c + 2.0 * b[0]), e * 2.0 * b[1], e * (2.0 * c + 2.0 * b[2])];
        (g, g1, g2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum CornerMetric {
    Spherical(SphericalCorner),
    TorusCollar(TorusCorner),
}

impl CornerMetric {
    pub fn family_name(&self) -> &'static str {
        match self {
            CornerMetric::Spherical(_) => "spherical",
            CornerMetric::TorusCollar(_) => "torus-collar",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_schwarzschild_jump() {
        let c = SphericalCorner::flat_in_schwarzschild(4.0, 0.5).unwrap();
        let hm = c.mean_curvature(Side::Minus).unwrap();
        let hp = c.mean_curvature(Side::Plus).unwrap();
        assert!((hm - 0.5).abs() < 1e-15);
        assert!((hp - 0.5 * 0.75f64.sqrt()).abs() < 1e-14);
        assert!((hm - hp - 0.066987298107781).abs() < 1e-12);
        assert_eq!(c.inner_boundary().unwrap(), InnerBoundary::Center);
    }

    #[test]
    fn torus_sides_agree_at_sigma() {
        let c = TorusCorner::kinked(8);
        for &(x1, x2) in &[(0.1, 0.2), (2.0, 5.0)] {
            let (gm, _, _) = c.metric_jet(Side::Minus, x1, x2, 0.0);
            let (gp, _, _) = c.metric_jet(Side::Plus, x1, x2, 0.0);
            assert_eq!(gm, gp);
        }
    }
}
