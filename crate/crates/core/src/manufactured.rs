//! Manufactured solutions for the radial solvers.
//!
//! `u = 1 + a ψ` on `ℝ³` with `Δψ = (1 - s²)⁴` inside the unit ball and
//! `ψ = -g(1)/s` outside, so `u` solves `Δu = V u` with `V = a (1 - s²)⁴ / u`
//! and has decay coefficient `A = -a g(1)`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // std inherent methods take precedence when std is linked
use num_traits::Float;

use crate::bvp::{shoot, solve_fd, solve_fd_richardson, OdeTolerance, RadialOperator, ShootStart};
use crate::extrapolate::fit_order;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub a: f64,
}

/// Outer radius of the manufactured domain.
pub const OUTER: f64 = 3.0;

impl Manufactured {
    fn g(s: f64) -> f64 {
        let s = s.min(1.0);
        s.powi(3) / 3.0 - 0.8 * s.powi(5) + 6.0 / 7.0 * s.powi(7) - 4.0 / 9.0 * s.powi(9) + s.powi(11) / 11.0
    }

    fn h(s: f64) -> f64 {
        s * s / 6.0 - 0.2 * s.powi(4) + s.powi(6) / 7.0 - s.powi(8) / 18.0 + s.powi(10) / 110.0
    }

    pub fn psi(s: f64) -> f64 {
        if s >= 1.0 {
            -Self::g(1.0) / s
        } else {
            -Self::g(1.0) - (Self::h(1.0) - Self::h(s))
        }
    }

    pub fn u(&self, s: f64) -> f64 {
        1.0 + self.a * Self::psi(s)
    }

    /// Potential `V` with `Δu = V u`.
    pub fn v(&self, s: f64) -> f64 {
        let f = if s < 1.0 { (1.0 - s * s).powi(4) } else { 0.0 };
        self.a * f / self.u(s)
    }

    pub fn decay(&self) -> f64 {
        -self.a * Self::g(1.0)
    }

    /// Uniform grid with `n` cells on `[0, OUTER]`.
    pub fn uniform(n: usize) -> Vec<f64> {
        (0..=n).map(|i| OUTER * i as f64 / n as f64).collect()
    }

    pub fn operator(&self, x: &[f64]) -> Result<RadialOperator> {
        let ones = vec![1.0; x.len()];
        let v: Vec<f64> = x.iter().map(|&s| self.v(s)).collect();
        RadialOperator::from_radius(x, 3, |s| Ok(s), &ones, &ones, &v, 1.0 / x[x.len() - 1])
    }

    /// Max relative error of `u` on `x`.
    pub fn error(&self, x: &[f64], u: &[f64]) -> f64 {
        x.iter().zip(u).map(|(&s, u)| ((u - self.u(s)) / self.u(s)).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ManufacturedReport {
    pub amplitude: f64,
    pub fd_cells: Vec<usize>,
    pub fd_errors: Vec<f64>,
    pub fd_order: f64,
    /// Richardson combination of the finest grid and its bisection.
    pub fd_extrapolated_error: f64,
    pub fd_decay_error: f64,
    pub shooting_error: f64,
    pub shooting_decay_error: f64,
}

impl ManufacturedReport {
    pub fn worst_error(&self) -> f64 {
        self.fd_extrapolated_error.max(self.shooting_error)
    }
}

/// Solves the manufactured problem with amplitude `a` by FD on a refinement
/// ladder and by shooting.
pub fn manufactured_report(a: f64) -> Result<ManufacturedReport> {
    let m = Manufactured { a };
    let fd_cells = vec![375, 750, 1500, 3000];
    let mut fd_errors = Vec::with_capacity(fd_cells.len());
    for &n in &fd_cells {
        let x = Manufactured::uniform(n);
        fd_errors.push(m.error(&x, &solve_fd(&m.operator(&x)?)?.u));
    }
    let h: Vec<f64> = fd_cells.iter().map(|&n| OUTER / n as f64).collect();
    let fd_order = fit_order(&h, &fd_errors).unwrap_or(0.0);
    let x = Manufactured::uniform(fd_cells[fd_cells.len() - 1]);
    let rich = solve_fd_richardson(&x, |g| m.operator(g))?;
    let xs = Manufactured::uniform(300);
    let shot = shoot(
        &xs,
        1,
        ShootStart::Center { dim: 3, offset: 1e-5 },
        |s, _, out| {
            out[0] = [s * s, s * s, m.v(s)];
            Ok(())
        },
        |_, _| 1.0 / OUTER,
        OdeTolerance::default(),
    )?;
    let shot = &shot[0];
    let big = m.decay().abs();
    Ok(ManufacturedReport {
        amplitude: a,
        fd_cells,
        fd_errors,
        fd_order,
        fd_extrapolated_error: m.error(&x, &rich.u),
        fd_decay_error: (rich.flux_out + m.decay()).abs() / big,
        shooting_error: m.error(&xs, &shot.u),
        shooting_decay_error: (shot.flux_out + m.decay()).abs() / big,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_is_continuous_at_the_shell() {
        let below = Manufactured::psi(1.0 - 1e-12);
        let above = Manufactured::psi(1.0);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn report_meets_targets() {
        let r = manufactured_report(3.0).unwrap();
        assert!(r.fd_order > 1.9, "{r:?}");
        assert!(r.worst_error() < 1e-8, "{r:?}");
        assert!(r.fd_decay_error < 1e-8 && r.shooting_decay_error < 1e-8, "{r:?}");
    }
}
