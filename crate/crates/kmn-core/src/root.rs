//! Bracketed scalar root finding (bisection-safeguarded Brent).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("non-finite function value at {0}")]
    NonFinite(f64),
}

/// Brent's method on a bracketing interval `[a, b]`.
///
/// Converges when `|f| <= tol_f` or the bracket width falls below
/// `tol_x * (1 + |x|)`. Exact zeros at the endpoints are accepted.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol_x: f64,
    tol_f: f64,
) -> Result<f64, RootError> {
    let max_iter = 200;
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    // c tracks the previous iterate; (b, fb) is the best point.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = b - a;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            (a, fa) = (b, fb);
            (b, fb) = (c, fc);
            (c, fc) = (a, fa);
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol_x;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb.abs() <= tol_f {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, falling back to secant.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let ok = 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs());
            if ok {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        (a, fa) = (b, fb);
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite(b));
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fb.signum() == fc.signum() {
            (c, fc) = (a, fa);
            d = b - a;
            e = d;
        }
    }
    Err(RootError::NoConvergence(max_iter))
}

/// Scan `[lo, hi]` in `n` equal pieces and return the first subinterval with a
/// sign change (or an exact zero) of `f`.
pub fn scan_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
) -> Option<(f64, f64)> {
    let h = (hi - lo) / n as f64;
    let mut xa = lo;
    let mut fa = f(xa);
    for i in 1..=n {
        let xb = lo + i as f64 * h;
        let fb = f(xb);
        if fa == 0.0 {
            return Some((xa, xa));
        }
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            return Some((xa, xb));
        }
        (xa, fa) = (xb, fb);
    }
    if fa == 0.0 {
        return Some((xa, xa));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_zero_is_accepted() {
        let r = brent(|x| x - 1.0, 1.0, 2.0, 1e-14, 0.0).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0),
            Err(RootError::NoBracket { .. })
        ));
    }

    #[test]
    fn scan_locates_sign_change() {
        let (a, b) = scan_bracket(|x| x.cos(), 0.0, 3.0, 30).unwrap();
        assert!(a < std::f64::consts::FRAC_PI_2 && std::f64::consts::FRAC_PI_2 < b);
    }
}
