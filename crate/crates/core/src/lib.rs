//! Numerical laboratory for metrics with corners along a hypersurface.
//!
//! A metric that is only Lipschitz across a closed hypersurface `Σ` is written
//! in Gaussian collar coordinates as a path of slice metrics `t ↦ γ(t)`. The
//! crate mollifies that path with a position-dependent bandwidth, measures the
//! Dirac-type scalar curvature concentration produced by a jump of the mean
//! curvature, and runs the two conformal deformations of the spherically
//! symmetric mass argument.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, reports and the
//! command line live in the companion `cornerpmt` crate.

#![no_std]

extern crate alloc;

pub mod bvp;
pub mod collar;
pub mod concentration;
pub mod corner;
pub mod equivalence;
pub mod error;
pub mod extrapolate;
pub mod kernel;
pub mod linalg;
pub mod manufactured;
pub mod mollifier;
pub mod oracle;
pub mod profile;
pub mod quadrature;
pub mod scenario;
pub mod slice;
pub mod spherical;
pub mod spline;
pub mod stencil;

pub use error::{Error, Result};
