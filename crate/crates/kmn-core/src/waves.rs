//! Traveling-wave first integrals, profile quadrature, and Jacobi
//! elliptic functions.
//!
//! Substituting u(x, t) = g(y) with wave coordinate y = k x - omega t into
//! u_t + (u^m)_x + (u^n)_xxx = 0 and integrating twice gives an energy-type
//! relation for the profile:
//!
//! ```text
//! n = 1:  (g_y)^2 = C0 g + (omega/k^3) g^2 - 2 g^(m+1)/((m+1) k^2) + gamma
//! n > 1:  (g^(n-1) g_y)^2 = 2 omega g^(n+1)/(n(n+1)k^3)
//!           - 2 g^(m+n)/(n(m+n)k^2) + 2 C g^n / n^2 + gamma
//! ```
//!
//! [`FirstIntegral`] owns the equation and wave parameters, [`rhs_n1`] /
//! [`rhs_general`] expose the right-hand sides, [`quadrature_y_of_g`]
//! integrates dy = g^(n-1) dg / sqrt(rhs) from a reference value, and
//! [`invert_quadrature`] recovers g(y) on a monotone branch, so profiles
//! can be produced and checked without any closed form. The Jacobi
//! functions at the bottom (arithmetic-geometric mean with a descending
//! Landen ladder) back the cnoidal-type profiles.

use crate::model::{spow, KmnParams};
use crate::quad::{self, QuadError};
use crate::root::{self, RootError};
use crate::solutions::TravelingWaveParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WavesError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("first integrals require unit coefficients, got kappa {kappa} and delta {delta}")]
    NotUnitCoefficients { kappa: f64, delta: f64 },
    #[error("invalid wave parameters: {reason}")]
    BadWave { reason: String },
    #[error("branch needs g_lo < g_hi containing g_ref and sign in {{-1, +1}}: [{g_lo}, {g_hi}], ref {g_ref}, sign {sign}")]
    BadBranch {
        g_lo: f64,
        g_hi: f64,
        g_ref: f64,
        sign: f64,
    },
    #[error("wave coordinate {y} is outside the branch (reachable |y| up to about {y_max})")]
    OutOfBranch { y: f64, y_max: f64 },
    #[error("elliptic modulus must lie in [0, 1], got {0}")]
    BadModulus(f64),
    #[error("complete elliptic integral diverges at modulus 1")]
    DivergentModulus,
}

/// Signed power for the relation terms. Every exponent these relations
/// produce is nonnegative (m >= 0, n >= 1), so the evaluation is total:
/// exponent zero is one, and positive exponents of zero are zero.
fn xp(u: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        spow(u, p).expect("first-integral exponents are positive")
    }
}

/// Which of the two first-integral families applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// n = 1: the profile equation integrates to a plain energy relation.
    LinearDispersion,
    /// n > 1: the relation carries the g^(n-1) weight.
    NonlinearDispersion,
}

/// First integral of the traveling-wave profile equation. Only the unit
/// coefficient normalization kappa = delta = 1 is supported: the relations
/// above are written for it.
#[derive(Debug, Clone, Copy)]
pub struct FirstIntegral {
    pub params: KmnParams,
    pub wave: TravelingWaveParams,
}

impl FirstIntegral {
    pub fn new(params: KmnParams, wave: TravelingWaveParams) -> Result<Self, WavesError> {
        if params.kappa != 1.0 || params.delta != 1.0 {
            return Err(WavesError::NotUnitCoefficients {
                kappa: params.kappa,
                delta: params.delta,
            });
        }
        wave.validate()
            .map_err(|e| WavesError::BadWave { reason: e.to_string() })?;
        Ok(FirstIntegral { params, wave })
    }

    pub fn case(&self) -> Case {
        if self.params.n == 1.0 {
            Case::LinearDispersion
        } else {
            Case::NonlinearDispersion
        }
    }

    /// Right-hand side of the applicable energy relation at profile value g.
    pub fn rhs(&self, g: f64) -> f64 {
        match self.case() {
            Case::LinearDispersion => rhs_n1(g, self),
            Case::NonlinearDispersion => rhs_general(g, self),
        }
    }

    /// d(rhs)/dg, used for turning-point and phase-plane checks.
    pub fn rhs_prime(&self, g: f64) -> f64 {
        let m = self.params.m;
        let n = self.params.n;
        let k = self.wave.k;
        let omega = self.wave.omega;
        let c = self.wave.c0_or_c;
        let k2 = k * k;
        let k3 = k2 * k;
        match self.case() {
            Case::LinearDispersion => c + 2.0 * omega / k3 * g - 2.0 / k2 * xp(g, m),
            Case::NonlinearDispersion => {
                2.0 * omega / (n * k3) * xp(g, n) - 2.0 / (n * k2) * xp(g, m + n - 1.0)
                    + 2.0 * c / n * xp(g, n - 1.0)
            }
        }
    }

    /// Exponent of the quadrature weight g^(n-1).
    pub fn weight_exponent(&self) -> f64 {
        self.params.n - 1.0
    }
}

/// Energy relation right-hand side for linear dispersion (n = 1):
/// the square of g_y as a function of the profile value.
pub fn rhs_n1(f: f64, fi: &FirstIntegral) -> f64 {
    let m = fi.params.m;
    let k = fi.wave.k;
    let k2 = k * k;
    fi.wave.c0_or_c * f + fi.wave.omega / (k2 * k) * f * f
        - 2.0 / ((m + 1.0) * k2) * xp(f, m + 1.0)
        + fi.wave.gamma
}

/// Energy relation right-hand side for nonlinear dispersion (n > 1):
/// the square of g^(n-1) g_y as a function of the profile value.
pub fn rhs_general(g: f64, fi: &FirstIntegral) -> f64 {
    let m = fi.params.m;
    let n = fi.params.n;
    let k = fi.wave.k;
    let k2 = k * k;
    let k3 = k2 * k;
    2.0 * fi.wave.omega / (n * (n + 1.0) * k3) * xp(g, n + 1.0)
        - 2.0 / (n * (m + n) * k2) * xp(g, m + n)
        + 2.0 * fi.wave.c0_or_c / (n * n) * xp(g, n)
        + fi.wave.gamma
}

/// A monotone stretch of the profile between consecutive turning values.
///
/// `g_ref` is the value at wave coordinate y = 0 and `sign` the slope sign
/// of g(y) on the stretch.
#[derive(Debug, Clone, Copy)]
pub struct Branch {
    pub g_lo: f64,
    pub g_hi: f64,
    pub g_ref: f64,
    pub sign: f64,
}

impl Branch {
    pub fn new(g_lo: f64, g_hi: f64, g_ref: f64, sign: f64) -> Result<Self, WavesError> {
        let ok = g_lo.is_finite()
            && g_hi.is_finite()
            && g_ref.is_finite()
            && g_lo < g_hi
            && g_ref >= g_lo
            && g_ref <= g_hi
            && (sign == 1.0 || sign == -1.0);
        if !ok {
            return Err(WavesError::BadBranch { g_lo, g_hi, g_ref, sign });
        }
        Ok(Branch { g_lo, g_hi, g_ref, sign })
    }
}

/// Absolute tolerance of the profile quadrature.
pub const QUAD_TOL: f64 = 1e-12;
/// Root tolerance of the quadrature inversion.
pub const INVERT_TOL: f64 = 1e-10;

/// Signed quadrature integral
/// `I(g) = integral from g_ref to g of s^(n-1) ds / sqrt(rhs(s))`,
/// negative when g < g_ref. On a monotone stretch with slope sign sigma
/// the wave coordinate of the value g is y = sigma * I(g).
///
/// The interval is split at its midpoint and each half is integrated under
/// the substitution `s = limit + tau^2`, which heals square-root turning
/// points at either limit; zeros of rhs strictly inside the range make the
/// integral diverge and are reported as such.
pub fn quadrature_y_of_g(g: f64, fi: &FirstIntegral, g_ref: f64) -> Result<f64, WavesError> {
    if g == g_ref {
        return Ok(0.0);
    }
    let (lo, hi, orient) = if g >= g_ref { (g_ref, g, 1.0) } else { (g, g_ref, -1.0) };
    let mid = 0.5 * (lo + hi);
    let value = side_integral(fi, lo, 1.0, mid - lo)? + side_integral(fi, hi, -1.0, hi - mid)?;
    Ok(orient * value)
}

/// One half of the profile quadrature: the integral of
/// `s^(n-1) / sqrt(rhs(s))` from `limit` inward over `span`, under the
/// substitution `s = limit + inward * tau^2`.
///
/// For `tau^2` below a vanishing band the energy is replaced by its tangent
/// model `max(rhs(limit), 0) + max(inward slope, 0) * tau^2`: nodes there
/// are not representably distinct from the limit, where an exact turning
/// point evaluates to cancellation noise of either sign. The model agrees
/// with the energy to second order in the band width at a regular limit and
/// keeps the substituted integrand finite at a simple turning point, while a
/// double root still grows without bound and is caught by the divergence
/// probe.
fn side_integral(
    fi: &FirstIntegral,
    limit: f64,
    inward: f64,
    span: f64,
) -> Result<f64, WavesError> {
    if span <= 0.0 {
        return Ok(0.0);
    }
    let w_exp = fi.weight_exponent();
    let base = fi.rhs(limit).max(0.0);
    let slope = (fi.rhs_prime(limit) * inward).max(0.0);
    let cross = 1e-12 * (1.0 + limit.abs());
    let g_tau = |tau: f64| {
        let delta = tau * tau;
        let rv = if delta <= cross {
            base + slope * delta
        } else {
            fi.rhs(limit + inward * delta)
        };
        if rv <= 0.0 {
            return f64::NAN; // outside the classically allowed region
        }
        2.0 * tau * xp(limit + inward * delta, w_exp) / rv.sqrt()
    };
    let t_max = span.sqrt();
    quad::probe_divergence(&g_tau, t_max, limit)?;
    Ok(quad::integrate(&g_tau, 0.0, t_max, 0.5 * QUAD_TOL)?.value)
}

/// Invert the profile quadrature on a monotone branch: find the profile
/// value g with `branch.sign * I(g) = y`, where I integrates from
/// `branch.g_ref` as in [`quadrature_y_of_g`].
///
/// The search walks geometrically from the reference value toward the
/// branch endpoint the target lies on, so homoclinic stretches whose
/// quadrature diverges at the endpoint still bracket quickly. Targets
/// beyond a finite-endpoint branch are reported with the largest |y| the
/// branch attains.
pub fn invert_quadrature(y: f64, fi: &FirstIntegral, branch: &Branch) -> Result<f64, WavesError> {
    let b = Branch::new(branch.g_lo, branch.g_hi, branch.g_ref, branch.sign)?;
    if y == 0.0 {
        return Ok(b.g_ref);
    }
    // sign * I(g) = y with I increasing in g: g lies above g_ref exactly
    // when sign * y is positive.
    let toward_hi = b.sign * y > 0.0;
    let endpoint = if toward_hi { b.g_hi } else { b.g_lo };
    let span = endpoint - b.g_ref;
    if span == 0.0 {
        return Err(WavesError::OutOfBranch { y, y_max: 0.0 });
    }
    let offset = |g: f64| -> Result<f64, WavesError> {
        Ok(b.sign * quadrature_y_of_g(g, fi, b.g_ref)? - y)
    };
    let mut g_prev = b.g_ref;
    let mut h_prev = -y;
    let mut reached = 0.0f64;
    let mut bracket: Option<(f64, f64)> = None;
    for j in 1..=41 {
        let frac = if j == 41 { 1.0 } else { 1.0 - 0.5f64.powi(j) };
        let g_probe = b.g_ref + frac * span;
        let h_probe = match offset(g_probe) {
            Ok(h) => h,
            // A diverging endpoint quadrature means every finite target on
            // this side would already have been bracketed by earlier probes.
            Err(WavesError::Quad(QuadError::Divergent { .. })) if j == 41 => break,
            Err(e) => return Err(e),
        };
        reached = reached.max((h_probe + y).abs());
        if h_prev == 0.0 {
            return Ok(g_prev);
        }
        if h_probe == 0.0 {
            return Ok(g_probe);
        }
        if h_prev.signum() != h_probe.signum() {
            bracket = Some((g_prev.min(g_probe), g_prev.max(g_probe)));
            break;
        }
        g_prev = g_probe;
        h_prev = h_probe;
    }
    let Some((lo, hi)) = bracket else {
        return Err(WavesError::OutOfBranch { y, y_max: reached });
    };
    let mut failure: Option<WavesError> = None;
    let g = root::brent(
        |g| match offset(g) {
            Ok(h) => h,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        INVERT_TOL,
        INVERT_TOL,
    );
    match g {
        Ok(g) => Ok(g),
        Err(e) => Err(failure.unwrap_or(WavesError::Root(e))),
    }
}

/// Jacobi elliptic functions sn, cn, dn of argument u and modulus k
/// (convention dn^2 + k^2 sn^2 = 1), by the arithmetic-geometric mean
/// with a descending amplitude ladder.
pub fn jacobi_sncndn(u: f64, k: f64) -> Result<(f64, f64, f64), WavesError> {
    if !k.is_finite() || !(0.0..=1.0).contains(&k) {
        return Err(WavesError::BadModulus(k));
    }
    if !u.is_finite() {
        return Err(WavesError::BadModulus(u));
    }
    if k < 1e-12 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    if 1.0 - k < 1e-12 {
        let sech = 1.0 / u.cosh();
        return Ok((u.tanh(), sech, sech));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut a_list = Vec::with_capacity(16);
    let mut c_list = Vec::with_capacity(16);
    let mut levels = 0usize;
    while (a - b).abs() > f64::EPSILON * a && levels < 60 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
        a_list.push(a);
        c_list.push(c);
        levels += 1;
    }
    if levels == 0 {
        // Modulus so small the mean converged immediately.
        return Ok((u.sin(), u.cos(), 1.0));
    }
    let mut phi = 2f64.powi(levels as i32) * a * u;
    for i in (0..levels).rev() {
        let s = (c_list[i] / a_list[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn never vanishes for modulus < 1, so the defining identity gives it
    // directly and stays regular where amplitude-ratio forms degenerate.
    let dn = (1.0 - k * k * sn * sn).max(0.0).sqrt();
    Ok((sn, cn, dn))
}

/// sn alone.
pub fn jacobi_sn(u: f64, k: f64) -> Result<f64, WavesError> {
    Ok(jacobi_sncndn(u, k)?.0)
}

/// Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, k')).
pub fn complete_elliptic_k(k: f64) -> Result<f64, WavesError> {
    if !k.is_finite() || !(0.0..=1.0).contains(&k) {
        return Err(WavesError::BadModulus(k));
    }
    if k == 1.0 {
        return Err(WavesError::DivergentModulus);
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..60 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        a = an;
        b = bn;
    }
    Ok(std::f64::consts::PI / (2.0 * a))
}
