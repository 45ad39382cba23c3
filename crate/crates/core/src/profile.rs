//! Closed-form areal-radius profiles `r(s)` of spherically symmetric metrics
//! `ds² + r(s)² ĝ`, with `s` the proper radial distance.

#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::{Error, Result};

/// `(r, dr/ds, d²r/ds²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RadialProfile {
    /// Euclidean: `r = anchor_r + (s - anchor_s)`.
    Flat { anchor_s: f64, anchor_r: f64 },
    /// Outward Schwarzschild branch (`n = 3`) through `(anchor_s, anchor_r)`;
    /// `dr/ds = √(1 - 2m/r)`. Negative `mass` is allowed.
    Schwarzschild { mass: f64, anchor_s: f64, anchor_r: f64 },
    /// Schwarzschild (`n = 3`, `m > 0`) starting at its minimal sphere
    /// `r = 2m` at `s = 0`.
    SchwarzschildThroat { mass: f64 },
    /// Constant curvature cap: `r = sin(√k s)/√k`.
    RoundSphere { curvature: f64 },
}

/// Proper distance antiderivative of `1/√(1 - 2m/r)`.
fn schwarzschild_distance(m: f64, r: f64) -> f64 {
    let a = r - 2.0 * m;
    (r * a).sqrt() + 2.0 * m * (r.sqrt() + a.sqrt()).ln()
}

fn schwarzschild_radius(m: f64, target: f64) -> Result<f64> {
    if m == 0.0 {
        return Ok(target);
    }
    if m > 0.0 {
        // r = 2m + y², dS/dy = 2 √r; S is convex increasing in y.
        let s_of = |y: f64| {
            let r = 2.0 * m + y * y;
            y * r.sqrt() + 2.0 * m * (r.sqrt() + y).ln()
        };
        if target < s_of(0.0) {
            return Err(Error::Geometry("inside the Schwarzschild minimal sphere".into()));
        }
        let mut y = target.abs().sqrt() + 2.0 + (2.0 * m).sqrt();
        while s_of(y) < target {
            y *= 2.0;
        }
        for _ in 0..200 {
            let r = 2.0 * m + y * y;
            let dy = (s_of(y) - target) / (2.0 * r.sqrt());
            y -= dy;
            if dy.abs() <= 1e-15 * (1.0 + y.abs()) {
                break;
            }
        }
        Ok(2.0 * m + y * y)
    } else {
        let mut r = target.abs() + 2.0 - 2.0 * m;
        while schwarzschild_distance(m, r) < target {
            r *= 2.0;
        }
        for _ in 0..200 {
            let dr = (schwarzschild_distance(m, r) - target) * (1.0 - 2.0 * m / r).sqrt();
            r -= dr;
            if dr.abs() <= 1e-15 * r.abs() {
                break;
            }
        }
        if !(r > 0.0) {
            return Err(Error::Geometry("Schwarzschild radius underflow".into()));
        }
        Ok(r)
    }
}

impl RadialProfile {
    pub fn jet(&self, s: f64) -> Result<RadialJet> {
        match *self {
            RadialProfile::Flat { anchor_s, anchor_r } => {
                Ok(RadialJet { r: anchor_r + (s - anchor_s), dr: 1.0, ddr: 0.0 })
            }
            RadialProfile::Schwarzschild { mass, anchor_s, anchor_r } => {
                if mass > 0.0 && anchor_r <= 2.0 * mass {
                    return Err(Error::Geometry("anchor inside the horizon".into()));
                }
                let c = anchor_s - schwarzschild_distance(mass, anchor_r);
                let r = schwarzschild_radius(mass, s - c)?;
                Ok(RadialJet { r, dr: (1.0 - 2.0 * mass / r).sqrt(), ddr: mass / (r * r) })
            }
            RadialProfile::SchwarzschildThroat { mass } => {
                if !(mass > 0.0) {
                    return Err(Error::Geometry("throat profile needs positive mass".into()));
                }
                let c = -schwarzschild_distance(mass, 2.0 * mass);
                let r = schwarzschild_radius(mass, s - c)?;
                let y = (r - 2.0 * mass).max(0.0).sqrt();
                Ok(RadialJet { r, dr: y / r.sqrt(), ddr: mass / (r * r) })
            }
            RadialProfile::RoundSphere { curvature } => {
                let k = curvature.sqrt();
                Ok(RadialJet { r: (k * s).sin() / k, dr: (k * s).cos(), ddr: -k * (k * s).sin() })
            }
        }
    }

    /// Closed-form scalar curvature in ambient dimension `n`.
    pub fn scalar_curvature(&self, n: usize) -> f64 {
        match *self {
            RadialProfile::RoundSphere { curvature } => (n * (n - 1)) as f64 * curvature,
            _ => 0.0,
        }
    }

    /// ADM mass parameter of the asymptotic region, when the profile has one.
    pub fn exterior_mass(&self) -> Option<f64> {
        match *self {
            RadialProfile::Flat { .. } => Some(0.0),
            RadialProfile::Schwarzschild { mass, .. } | RadialProfile::SchwarzschildThroat { mass } => Some(mass),
            RadialProfile::RoundSphere { .. } => None,
        }
    }

    /// Whether the profile only makes sense in three dimensions.
    pub fn three_dimensional_only(&self) -> bool {
        matches!(self, RadialProfile::Schwarzschild { .. } | RadialProfile::SchwarzschildThroat { .. })
    }
}

/// Hawking (Misner–Sharp) mass `((n-1)/4) r^{n-2} (1 - r'²)`; for `n = 3` this
/// is `(r/2)(1 - r'²)`, which returns the Schwarzschild mass parameter.
pub fn hawking_mass(n: usize, r: f64, dr: f64) -> f64 {
    0.25 * (n - 1) as f64 * r.powi(n as i32 - 2) * (1.0 - dr * dr)
}

/// Generic scalar curvature of `ds² + r² ĝ_{S^{n-1}}`:
/// `(n-1)(n-2)(1 - r'²)/r² - 2(n-1) r''/r`.
pub fn radial_scalar_curvature(n: usize, j: &RadialJet) -> f64 {
    let k = (n - 1) as f64;
    k * (k - 1.0) * (1.0 - j.dr * j.dr) / (j.r * j.r) - 2.0 * k * j.ddr / j.r
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classical RK4 on dr/ds = √(1 - 2m/r), independent of the closed form.
    fn rk4_radius(m: f64, r0: f64, ds: f64, steps: usize) -> f64 {
        let f = |r: f64| (1.0 - 2.0 * m / r).sqrt();
        let h = ds / steps as f64;
        let mut r = r0;
        for _ in 0..steps {
            let k1 = f(r);
            let k2 = f(r + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h * k2);
            let k4 = f(r + h * k3);
            r += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        r
    }

    #[test]
    fn schwarzschild_branch_matches_ode_integration() {
        for &m in &[0.5, -0.5, 0.1] {
            let p = RadialProfile::Schwarzschild { mass: m, anchor_s: 4.0, anchor_r: 4.0 };
            let j0 = p.jet(4.0).unwrap();
            assert!((j0.r - 4.0).abs() < 1e-13);
            for &ds in &[0.5, 2.0, 30.0] {
                let r = p.jet(4.0 + ds).unwrap().r;
                let oracle = rk4_radius(m, 4.0, ds, 20000);
                assert!((r - oracle).abs() < 1e-10 * oracle, "m={m} ds={ds}: {r} vs {oracle}");
            }
            // inward along the same branch
            let r = p.jet(3.0).unwrap().r;
            assert!((r - rk4_radius(m, 4.0, -1.0, 20000)).abs() < 1e-10);
        }
    }

    #[test]
    fn schwarzschild_is_vacuum_with_constant_hawking_mass() {
        let p = RadialProfile::Schwarzschild { mass: 0.5, anchor_s: 4.0, anchor_r: 4.0 };
        for &s in &[4.0, 7.5, 60.0] {
            let j = p.jet(s).unwrap();
            assert!(radial_scalar_curvature(3, &j).abs() < 1e-14);
            assert!((hawking_mass(3, j.r, j.dr) - 0.5).abs() < 1e-12);
        }
        let j = p.jet(4.0).unwrap();
        assert!((j.dr - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn throat_starts_at_minimal_sphere() {
        let p = RadialProfile::SchwarzschildThroat { mass: 0.5 };
        let j = p.jet(0.0).unwrap();
        assert!((j.r - 1.0).abs() < 1e-12 && j.dr.abs() < 1e-6);
        let j = p.jet(1e-3).unwrap();
        // r ≈ 2m + s²/(8m)
        assert!((j.r - 1.0 - 1e-6 / 4.0).abs() < 1e-10);
        let j = p.jet(5.0).unwrap();
        assert!((hawking_mass(3, j.r, j.dr) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn round_sphere_has_scalar_six() {
        let p = RadialProfile::RoundSphere { curvature: 1.0 };
        for &s in &[0.4, 1.0, 2.0] {
            let j = p.jet(s).unwrap();
            assert!((radial_scalar_curvature(3, &j) - 6.0).abs() < 1e-12);
        }
    }
}
