//! Adaptive Gauss–Kronrod quadrature.
//!
//! The workhorse is a 7-point Gauss / 15-point Kronrod pair with bisection
//! refinement. [`integrate_sqrt_endpoints`] additionally substitutes
//! `s = endpoint -/+ tau^2` on the two outer panels, which turns an
//! inverse-square-root endpoint singularity (a simple turning point of an
//! orbit integral) into a smooth integrand. Non-integrable endpoints are
//! detected by probing the substituted integrand on a geometric ladder.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("integrand is non-finite at {0}")]
    NonFinite(f64),
    #[error("integral did not converge: error estimate {achieved:e} > {requested:e}")]
    NoConvergence { achieved: f64, requested: f64 },
    #[error("integrand diverges at endpoint {0}")]
    Divergent(f64),
    #[error("invalid interval [{0}, {1}]")]
    BadInterval(f64, f64),
}

/// Kronrod abscissae (positive half, 15-point rule).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_27,
    0.0,
];
/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// 7-point Gauss weights (for `XGK[1], XGK[3], XGK[5], XGK[7]`).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

struct Panel {
    value: f64,
    error: f64,
}

fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64, QuadError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite(x))
        }
    };
    let fc = eval(centre)?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let absc = half * XGK[j];
        let f1 = eval(centre - absc)?;
        let f2 = eval(centre + absc)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - reskh).abs() + (fv[14 - j] - reskh).abs());
    }
    resasc *= half.abs();
    resabs *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0f64.min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(f64::EPSILON * 50.0 * resabs);
    }
    Ok(Panel {
        value: resk * half,
        error: err,
    })
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub abs_err: f64,
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// `a > b` is allowed and flips the sign. The integrand must be finite on
/// the open interval. Panels share one global error budget and the worst
/// panel is refined first, so a sharp (but integrable) feature anywhere in
/// the interval only sharpens the mesh around itself. If the budget is
/// still unmet when the worst panel can no longer be split, or after the
/// panel cap, [`QuadError::NoConvergence`] reports the achieved error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature, QuadError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::BadInterval(a, b));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_err: 0.0 });
    }
    let (lo, hi, sgn) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let tol = abs_tol.max(1e-300);
    struct P {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    }
    const MAX_PANELS: usize = 4096;
    // Splitting a panel of a resolvable integrand shrinks its estimate by
    // at least a constant factor; a split that leaves the children's joint
    // estimate at the parent's level is working on evaluation noise (e.g.
    // cancellation near a turning point), which no refinement removes.
    // After this many fruitless splits in total the best value is accepted
    // with its achieved error.
    const STAGNATION_LIMIT: u32 = 40;
    let first = qk15(&f, lo, hi)?;
    let mut panels = vec![P { a: lo, b: hi, value: first.value, error: first.error }];
    let mut stagnant = 0u32;
    loop {
        let err_sum: f64 = panels.iter().map(|p| p.error).sum();
        if err_sum <= tol || stagnant >= STAGNATION_LIMIT {
            break;
        }
        let idx = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (pa, pb) = (panels[idx].a, panels[idx].b);
        let width_floor = f64::EPSILON * (pa.abs() + pb.abs()).max(f64::MIN_POSITIVE);
        if pb - pa <= width_floor {
            break; // unsplittable: width itself is at round-off scale
        }
        if panels.len() >= MAX_PANELS {
            return Err(QuadError::NoConvergence { achieved: err_sum, requested: tol });
        }
        let mid = 0.5 * (pa + pb);
        let l = qk15(&f, pa, mid)?;
        let r = qk15(&f, mid, pb)?;
        if l.error + r.error >= 0.99 * panels[idx].error {
            stagnant += 1;
        }
        panels[idx] = P { a: pa, b: mid, value: l.value, error: l.error };
        panels.push(P { a: mid, b: pb, value: r.value, error: r.error });
    }
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let abs_err: f64 = panels.iter().map(|p| p.error).sum();
    Ok(Quadrature { value: sgn * value, abs_err })
}

/// Probe the substituted integrand `g(tau)` for endpoint divergence.
///
/// `g(tau) = 2 tau f(endpoint ± tau²)` is bounded for any integrable
/// algebraic endpoint singularity the substitution can heal; for a
/// non-integrable one (`f ~ 1/s` or worse) it grows without bound as
/// `tau -> 0`. Growth by a steady factor across a geometric ladder is treated
/// as divergence.
pub(crate) fn probe_divergence<G: Fn(f64) -> f64>(
    g: &G,
    t_max: f64,
    endpoint: f64,
) -> Result<(), QuadError> {
    let mut prev = g(t_max * 2f64.powi(-10)).abs();
    let mut growing = 0;
    for j in 11..=16 {
        let cur = g(t_max * 2f64.powi(-j)).abs();
        if !cur.is_finite() {
            return Err(QuadError::Divergent(endpoint));
        }
        if cur > 1.4 * prev && cur > 1e3 {
            growing += 1;
        } else {
            growing = 0;
        }
        prev = cur;
    }
    if growing >= 4 {
        return Err(QuadError::Divergent(endpoint));
    }
    Ok(())
}

/// Integrate `f` over `[a, b]` (`a < b`) where either endpoint may carry an
/// integrable algebraic singularity such as `1/sqrt(b - s)`.
///
/// The interval is split at its midpoint; each half is mapped by
/// `s = a + tau²` (resp. `s = b - tau²`) so that Kronrod nodes never touch
/// the endpoints and square-root singularities become smooth.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<Quadrature, QuadError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::BadInterval(a, b));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_err: 0.0 });
    }
    let mid = 0.5 * (a + b);
    let ta = (mid - a).sqrt();
    let tb = (b - mid).sqrt();
    let left = |tau: f64| 2.0 * tau * f(a + tau * tau);
    let right = |tau: f64| 2.0 * tau * f(b - tau * tau);
    probe_divergence(&left, ta, a)?;
    probe_divergence(&right, tb, b)?;
    let l = integrate(&left, 0.0, ta, 0.5 * abs_tol)?;
    let r = integrate(&right, 0.0, tb, 0.5 * abs_tol)?;
    Ok(Quadrature {
        value: l.value + r.value,
        abs_err: l.abs_err + r.abs_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth() {
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let q = integrate(|x: f64| x * x, 1.0, 0.0, 1e-13).unwrap();
        assert!((q.value + 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn handles_sqrt_singularity_both_ends() {
        // ∫_0^1 ds / sqrt(s(1-s)) = pi.
        let q = integrate_sqrt_endpoints(|s: f64| 1.0 / (s * (1.0 - s)).sqrt(), 0.0, 1.0, 1e-12)
            .unwrap();
        assert!((q.value - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn arcsine_orbit_integral() {
        // ∫_0^g ds / sqrt(1 - s²) = asin(g) with a turning point at 1.
        let g = 0.999_999;
        let q = integrate_sqrt_endpoints(|s: f64| 1.0 / (1.0 - s * s).sqrt(), 0.0, g, 1e-12)
            .unwrap();
        assert!((q.value - g.asin()).abs() < 1e-10);
    }

    #[test]
    fn detects_non_integrable_endpoint() {
        let r = integrate_sqrt_endpoints(|s: f64| 1.0 / s, 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(QuadError::Divergent(_))));
    }

    #[test]
    fn rejects_interior_nan() {
        let r = integrate(|x: f64| (x - 0.5).sqrt(), 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(QuadError::NonFinite(_))));
    }
}
