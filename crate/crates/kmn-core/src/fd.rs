//! Central finite-difference stencils shared by the stepper and the
//! residual checks.
//!
//! Two families live here:
//! - slice stencils (`d1_o2`, ..., `d3_o4`) reading from a window around an
//!   index, used on periodic padded arrays by [`crate::solver`];
//! - callable stencils (`diff1_fn`, `diff2_fn`, `diff3_fn`) of 6th order,
//!   used by tests to cross-check hand-written analytic derivatives.

/// Copy `w` with `margin` wrapped values prepended and appended, so a
/// stencil of half-width `margin` can be applied at every periodic node.
/// Requires `margin <= w.len()`.
pub(crate) fn padded_periodic(w: &[f64], margin: usize) -> Vec<f64> {
    let n = w.len();
    assert!(margin <= n, "padding wider than the field");
    let mut out = Vec::with_capacity(n + 2 * margin);
    out.extend_from_slice(&w[n - margin..]);
    out.extend_from_slice(w);
    out.extend_from_slice(&w[..margin]);
    out
}

/// First derivative, 2nd order: (w[i+1] - w[i-1]) / (2 dx).
#[inline]
pub fn d1_o2(w: &[f64], i: usize, dx: f64) -> f64 {
    (w[i + 1] - w[i - 1]) / (2.0 * dx)
}

/// First derivative, 4th order.
#[inline]
pub fn d1_o4(w: &[f64], i: usize, dx: f64) -> f64 {
    (w[i - 2] - 8.0 * w[i - 1] + 8.0 * w[i + 1] - w[i + 2]) / (12.0 * dx)
}

/// Second derivative, 2nd order.
#[inline]
pub fn d2_o2(w: &[f64], i: usize, dx: f64) -> f64 {
    (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (dx * dx)
}

/// Second derivative, 4th order.
#[inline]
pub fn d2_o4(w: &[f64], i: usize, dx: f64) -> f64 {
    (-w[i - 2] + 16.0 * w[i - 1] - 30.0 * w[i] + 16.0 * w[i + 1] - w[i + 2])
        / (12.0 * dx * dx)
}

/// Third derivative, 2nd order.
#[inline]
pub fn d3_o2(w: &[f64], i: usize, dx: f64) -> f64 {
    (w[i + 2] - 2.0 * w[i + 1] + 2.0 * w[i - 1] - w[i - 2]) / (2.0 * dx * dx * dx)
}

/// Third derivative, 4th order.
#[inline]
pub fn d3_o4(w: &[f64], i: usize, dx: f64) -> f64 {
    (w[i - 3] - 8.0 * w[i - 2] + 13.0 * w[i - 1] - 13.0 * w[i + 1] + 8.0 * w[i + 2]
        - w[i + 3])
        / (8.0 * dx * dx * dx)
}

/// 6th-order first derivative of a callable at `x` with spacing `h`.
pub fn diff1_fn<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 3.0 * h) + 9.0 * f(x - 2.0 * h) - 45.0 * f(x - h) + 45.0 * f(x + h)
        - 9.0 * f(x + 2.0 * h)
        + f(x + 3.0 * h))
        / (60.0 * h)
}

/// 6th-order second derivative of a callable.
pub fn diff2_fn<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (2.0 * f(x - 3.0 * h) - 27.0 * f(x - 2.0 * h) + 270.0 * f(x - h) - 490.0 * f(x)
        + 270.0 * f(x + h)
        - 27.0 * f(x + 2.0 * h)
        + 2.0 * f(x + 3.0 * h))
        / (180.0 * h * h)
}

/// 6th-order third derivative of a callable (9-point antisymmetric stencil).
pub fn diff3_fn<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let c1 = -61.0 / 30.0;
    let c2 = 169.0 / 120.0;
    let c3 = -3.0 / 10.0;
    let c4 = 7.0 / 240.0;
    (-c4 * f(x - 4.0 * h) - c3 * f(x - 3.0 * h) - c2 * f(x - 2.0 * h) - c1 * f(x - h)
        + c1 * f(x + h)
        + c2 * f(x + 2.0 * h)
        + c3 * f(x + 3.0 * h)
        + c4 * f(x + 4.0 * h))
        / (h * h * h)
}
