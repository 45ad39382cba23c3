use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Induced metrics of the two sides disagree on `Σ`.
    CornerMismatch { max_diff: f64, tol: f64 },
    /// A slice metric is not positive definite, or a profile is out of range.
    Geometry(String),
    /// A finite-difference stencil does not fit on the grid or crosses the corner.
    Stencil { index: usize, reason: &'static str },
    /// Singular slice metric.
    Inversion { node: usize },
    /// Quadrature self-estimate above the requested tolerance.
    Quadrature { estimate: f64, tol: f64 },
    /// Boundary value solve did not reach the residual target.
    Solver { residual: f64 },
    /// The conformal factor is not positive; the smallness hypothesis failed.
    SmallnessViolated { min_u: f64, smallness: f64 },
    /// The Hawking mass has not settled at the outer boundary.
    Asymptotics { drift: f64 },
    /// Convergence sequence is not usable for extrapolation.
    Extrapolation(&'static str),
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CornerMismatch { max_diff, tol } => write!(
                f,
                "corner construction: induced metrics differ by {max_diff:e} (tolerance {tol:e})"
            ),
            Error::Geometry(msg) => write!(f, "geometry: {msg}"),
            Error::Stencil { index, reason } => write!(f, "stencil at node {index}: {reason}"),
            Error::Inversion { node } => write!(f, "singular slice metric at node {node}"),
            Error::Quadrature { estimate, tol } => {
                write!(f, "quadrature error estimate {estimate:e} exceeds {tol:e}")
            }
            Error::Solver { residual } => write!(f, "BVP solver residual {residual:e}"),
            Error::SmallnessViolated { min_u, smallness } => write!(
                f,
                "conformal factor not positive (min u = {min_u:e}); smallness quantity {smallness:e}"
            ),
            Error::Asymptotics { drift } => {
                write!(f, "Hawking mass not converged at outer boundary (drift {drift:e})")
            }
            Error::Extrapolation(msg) => write!(f, "extrapolation: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
