//! Finite-difference stencils on uniform spacing.
//!
//! `f` slices are ordered along increasing coordinate; the point of
//! evaluation is named in each function.

/// Fourth-order centered first derivative at the middle of `f[0..5]`.
#[inline]
pub fn d1_central4(f: [f64; 5], h: f64) -> f64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)
}

/// Fourth-order centered second derivative at the middle of `f[0..5]`.
#[inline]
pub fn d2_central4(f: [f64; 5], h: f64) -> f64 {
    (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)
}

/// Second-order centered first derivative at `f[1]`.
#[inline]
pub fn d1_central2(f: [f64; 3], h: f64) -> f64 {
    (f[2] - f[0]) / (2.0 * h)
}

/// Second-order centered second derivative at `f[1]`.
#[inline]
pub fn d2_central2(f: [f64; 3], h: f64) -> f64 {
    (f[0] - 2.0 * f[1] + f[2]) / (h * h)
}

/// Second-order one-sided first derivative at `f[0]`, with `f[k]` at `x0 + k·h`.
/// Pass a negative `h` for the backward direction.
#[inline]
pub fn d1_onesided2(f: [f64; 3], h: f64) -> f64 {
    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
}

/// Second-order one-sided second derivative at `f[0]`.
#[inline]
pub fn d2_onesided2(f: [f64; 4], h: f64) -> f64 {
    (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
}

/// Fourth-order one-sided first derivative at `f[0]`.
#[inline]
pub fn d1_onesided4(f: [f64; 5], h: f64) -> f64 {
    (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
}
