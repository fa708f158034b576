//! Constraint-based solution generation and verification: a pointwise
//! Schrödinger-type constraint with its first-order transport companion,
//! profile orbits computed two independent ways (direct integration and
//! quadrature inversion), reciprocal-solution constraints with their first
//! integral and transport speed, a characteristics solver for the induced
//! quasilinear flow, and separation of variables for equal exponents.
//!
//! Everything here works on sampled functions and finite-difference
//! residuals; no symbolic manipulation is involved. Residuals are always
//! taken with unit flux coefficients.

use std::cell::Cell;

use num_traits::One;
use thiserror::Error;

use crate::fd::{d1_o4, d2_o4, d3_o4};
use crate::interp::{HermiteTable, InterpError};
use crate::model::{spow, ModelError};
use crate::ode::{self, OdeError, OdeOptions};
use crate::quad::QuadError;
use crate::root::{brent, scan_bracket, RootError};
use crate::symmetry::{rat, Rat};

#[derive(Debug, Error)]
pub enum ConstraintsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("sampling grids do not match: {0}")]
    GridMismatch(String),
    #[error("function must stay positive: found {value} at x = {x}")]
    NonPositiveSample { x: f64, value: f64 },
    #[error("initial state violates the energy relation by {defect}")]
    InconsistentEnergy { defect: f64 },
    #[error("the energy never turns negative away from phi = {0}: orbit is unbounded")]
    UnboundedOrbit(f64),
    #[error("first-integral right side is negative at the start ({0}): no real slope")]
    NegativeEnergy(f64),
    #[error("no root bracket for the implicit profile relation at (x, t) = ({x}, {t}); the wave may have broken")]
    NoCharacteristicRoot { x: f64, t: f64 },
    #[error("time factor blows up at t = {0}")]
    BlowUpTime(f64),
    #[error("power of a negative base with non-integer exponent at {0}")]
    NonRealPower(f64),
}

/// Uniform single-variable samples: `values[i]` is the function at
/// `x0 + i * dx`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self, ConstraintsError> {
        if !(dx.is_finite() && dx > 0.0) || !x0.is_finite() {
            return Err(ConstraintsError::InvalidParams(format!(
                "profile needs finite x0 and positive dx, got ({x0}, {dx})"
            )));
        }
        if values.len() < 5 {
            return Err(ConstraintsError::InvalidParams(format!(
                "profile needs at least 5 samples, got {}",
                values.len()
            )));
        }
        Ok(Profile { x0, dx, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(
        x0: f64,
        dx: f64,
        n: usize,
        f: F,
    ) -> Result<Self, ConstraintsError> {
        let values = (0..n).map(|i| f(x0 + dx * i as f64)).collect();
        Profile::new(x0, dx, values)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Time-resolved samples, time-major: `values[j][i]` is the function at
/// `(x0 + i * dx, t0 + j * dt)`.
#[derive(Debug, Clone)]
pub struct SpaceTime {
    pub x0: f64,
    pub dx: f64,
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Vec<f64>>,
}

impl SpaceTime {
    pub fn new(
        x0: f64,
        dx: f64,
        t0: f64,
        dt: f64,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, ConstraintsError> {
        if !(dx.is_finite() && dx > 0.0) || !(dt.is_finite() && dt > 0.0) {
            return Err(ConstraintsError::InvalidParams(format!(
                "space-time samples need positive spacings, got dx = {dx}, dt = {dt}"
            )));
        }
        if values.len() < 3 {
            return Err(ConstraintsError::InvalidParams(format!(
                "need at least 3 time levels for centered differences, got {}",
                values.len()
            )));
        }
        let nx = values[0].len();
        if nx < 7 {
            return Err(ConstraintsError::InvalidParams(format!(
                "need at least 7 space samples, got {nx}"
            )));
        }
        if values.iter().any(|row| row.len() != nx) {
            return Err(ConstraintsError::GridMismatch(
                "time levels have unequal lengths".into(),
            ));
        }
        Ok(SpaceTime { x0, dx, t0, dt, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        x0: f64,
        dx: f64,
        nx: usize,
        t0: f64,
        dt: f64,
        nt: usize,
        f: F,
    ) -> Result<Self, ConstraintsError> {
        let values = (0..nt)
            .map(|j| {
                let t = t0 + dt * j as f64;
                (0..nx).map(|i| f(x0 + dx * i as f64, t)).collect()
            })
            .collect();
        SpaceTime::new(x0, dx, t0, dt, values)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    pub fn nx(&self) -> usize {
        self.values[0].len()
    }

    pub fn nt(&self) -> usize {
        self.values.len()
    }

    /// Time-stencil half-width: 4th order when five levels exist, else 2nd.
    fn t_margin(&self) -> usize {
        if self.nt() >= 5 {
            2
        } else {
            1
        }
    }

    fn d1_time(&self, j: usize, i: usize) -> f64 {
        let v = &self.values;
        if self.t_margin() == 2 {
            (v[j - 2][i] - 8.0 * v[j - 1][i] + 8.0 * v[j + 1][i] - v[j + 2][i]) / (12.0 * self.dt)
        } else {
            (v[j + 1][i] - v[j - 1][i]) / (2.0 * self.dt)
        }
    }
}

fn profiles_match(a: &Profile, b: &Profile) -> Result<(), ConstraintsError> {
    if a.x0 != b.x0 || a.dx != b.dx || a.len() != b.len() {
        return Err(ConstraintsError::GridMismatch(format!(
            "({}, {}, {}) vs ({}, {}, {})",
            a.x0,
            a.dx,
            a.len(),
            b.x0,
            b.dx,
            b.len()
        )));
    }
    Ok(())
}

fn space_times_match(a: &SpaceTime, b: &SpaceTime) -> Result<(), ConstraintsError> {
    if a.x0 != b.x0 || a.dx != b.dx || a.t0 != b.t0 || a.dt != b.dt || a.nx() != b.nx()
        || a.nt() != b.nt()
    {
        return Err(ConstraintsError::GridMismatch(
            "space-time sample layouts differ".into(),
        ));
    }
    Ok(())
}

/// `u^p` with the convention that a zero exponent always yields 1 (so the
/// linear case needs no special casing at `u = 0`).
fn power_or_one(u: f64, p: f64) -> Result<f64, ConstraintsError> {
    if p == 0.0 {
        Ok(1.0)
    } else {
        Ok(spow(u, p)?)
    }
}

/// Which constraint a workflow exercises, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Schrodinger41,
    Reciprocal49,
    FirstIntegral412,
    Transport414,
    ReciprocalN418,
    Separation420,
}

/// A constraint selection plus the scalars it needs.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub m: f64,
    pub n: f64,
    pub lambda: f64,
    pub k_const: f64,
}

impl ConstraintSpec {
    pub fn new(
        kind: ConstraintKind,
        m: f64,
        n: f64,
        lambda: f64,
        k_const: f64,
    ) -> Result<Self, ConstraintsError> {
        if !(m.is_finite() && n.is_finite() && lambda.is_finite() && k_const.is_finite()) {
            return Err(ConstraintsError::InvalidParams(
                "constraint parameters must be finite".into(),
            ));
        }
        let needs_m_not_one = matches!(
            kind,
            ConstraintKind::Reciprocal49
                | ConstraintKind::FirstIntegral412
                | ConstraintKind::Transport414
        );
        if needs_m_not_one && m == 1.0 {
            return Err(ConstraintsError::InvalidParams(
                "the first-integral constants a = b = -m/(3(m-1)) require m != 1".into(),
            ));
        }
        if kind == ConstraintKind::Separation420 && m != n {
            return Err(ConstraintsError::InvalidParams(format!(
                "separation of variables needs equal exponents, got m = {m}, n = {n}"
            )));
        }
        Ok(ConstraintSpec { kind, m, n, lambda, k_const })
    }
}

/// Max over interior nodes of
/// `|psi_xx + (m/(2(m+1)) u^{m-1} + lambda) psi|`
/// with a 4th-order second-difference for `psi_xx`.
pub fn schrodinger_residual(
    psi: &Profile,
    u: &Profile,
    m: f64,
    lambda: f64,
) -> Result<f64, ConstraintsError> {
    if !(m.is_finite() && m != -1.0) || !lambda.is_finite() {
        return Err(ConstraintsError::InvalidParams(format!(
            "need finite lambda and finite m != -1, got m = {m}, lambda = {lambda}"
        )));
    }
    profiles_match(psi, u)?;
    let c = m / (2.0 * (m + 1.0));
    let mut worst = 0.0f64;
    for i in 2..psi.len() - 2 {
        let psi_xx = d2_o4(&psi.values, i, psi.dx);
        let wpow = power_or_one(u.values[i], m - 1.0)?;
        let r = psi_xx + (c * wpow + lambda) * psi.values[i];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Max over interior nodes of `|f (g_t - 4 lambda g_x) + g (f_t - 4 lambda f_x)|`.
///
/// This is the transport companion of the pointwise constraint: it vanishes
/// exactly when `ln(f g)` is constant along `x + 4 lambda t`.
pub fn factored_transport_residual(
    f: &SpaceTime,
    g: &SpaceTime,
    lambda: f64,
) -> Result<f64, ConstraintsError> {
    if !lambda.is_finite() {
        return Err(ConstraintsError::InvalidParams(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    space_times_match(f, g)?;
    let tm = f.t_margin();
    let mut worst = 0.0f64;
    for j in tm..f.nt() - tm {
        for i in 2..f.nx() - 2 {
            let fx = d1_o4(&f.values[j], i, f.dx);
            let gx = d1_o4(&g.values[j], i, g.dx);
            let ft = f.d1_time(j, i);
            let gt = g.d1_time(j, i);
            let r = f.values[j][i] * (gt - 4.0 * lambda * gx)
                + g.values[j][i] * (ft - 4.0 * lambda * fx);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Solve the coefficient chain `a + b = m`, `q(m-1) + b/2 = 0`, `4q + a = 0`
/// exactly over the rationals, returning `(a, b, q)`.
///
/// Elimination gives `q (m+1) = -m/2`, so `m = -1` has no solution.
pub fn ansatz_constants(m: &Rat) -> Result<(Rat, Rat, Rat), ConstraintsError> {
    let one = Rat::one();
    if *m == -one.clone() {
        return Err(ConstraintsError::InvalidParams(
            "the coefficient chain degenerates at m = -1".into(),
        ));
    }
    // From 4q + a = 0: a = -4q; then b = m - a = m + 4q; substituting into
    // q(m-1) + b/2 = 0 gives q(m+1) = -m/2.
    let q = -(m / (rat(2, 1) * (m + &one)));
    let a = -(rat(4, 1) * &q);
    let b = m - &a;
    Ok((a, b, q))
}

/// The even energy function `R(phi) = C0 - phi^{2m}/(2(m+1)) - lambda phi^2`
/// and its derivative; `phi^{2m}` is evaluated as `(phi^2)^m`, so the energy
/// is well-defined for every real `phi` when `m >= 1`.
#[derive(Debug, Clone, Copy)]
struct Energy {
    m: f64,
    lambda: f64,
    c0: f64,
}

impl Energy {
    fn r(&self, phi: f64) -> f64 {
        let even = spow(phi * phi, self.m).expect("m >= 1 so the even power is total");
        self.c0 - even / (2.0 * (self.m + 1.0)) - self.lambda * phi * phi
    }

    fn r_prime(&self, phi: f64) -> f64 {
        let p = self.m - 1.0;
        let grow = if p == 0.0 {
            1.0
        } else if phi == 0.0 {
            0.0
        } else {
            spow(phi * phi, p).expect("m >= 1 so the even power is total")
        };
        -(self.m / (self.m + 1.0)) * grow * phi - 2.0 * self.lambda * phi
    }

    fn scale(&self) -> f64 {
        1.0 + self.c0.abs() + self.lambda.abs()
    }
}

fn newton_polish(en: &Energy, x0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..6 {
        let d = en.r_prime(x);
        if d == 0.0 {
            break;
        }
        let step = en.r(x) / d;
        x -= step;
        if step.abs() < 1e-17 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Move `x` toward `toward` one representable value at a time until the
/// energy is non-negative, so the square root inside the quadrature never
/// sees a negative argument at its own endpoint.
fn nudge_nonnegative(en: &Energy, mut x: f64, toward: f64) -> f64 {
    for _ in 0..64 {
        if en.r(x) >= 0.0 {
            break;
        }
        x = if toward > x { x.next_up() } else { x.next_down() };
    }
    x
}

/// Locate the first zero of the energy strictly beyond `from` in direction
/// `dir` (+1 or -1), polish it, and nudge it to the inside of the well.
fn march_to_root(en: &Energy, from: f64, dir: f64) -> Result<f64, ConstraintsError> {
    let h = 0.05 * (1.0 + from.abs()) * dir;
    let mut prev = from;
    for k in 1..=2000 {
        let x = from + h * k as f64;
        let rv = en.r(x);
        if rv == 0.0 {
            let root = newton_polish(en, x);
            return Ok(nudge_nonnegative(en, root, from));
        }
        if rv < 0.0 {
            let (a, b) = if prev < x { (prev, x) } else { (x, prev) };
            let root = brent(|s| en.r(s), a, b, 1e-14, 0.0)?;
            let root = newton_polish(en, root);
            return Ok(nudge_nonnegative(en, root, from));
        }
        prev = x;
    }
    Err(ConstraintsError::UnboundedOrbit(from))
}

/// A potential well of the energy: the orbit interval between two polished
/// turning points, with arc-length machinery.
///
/// The arc length `int d phi / sqrt(R)` is computed with the substitution
/// `phi = endpoint +- tau^2`, done by hand so that inside the band where
/// `endpoint + tau^2` is not representably distinct from the endpoint the
/// energy is replaced by its linear model `R(endpoint) + |R'| tau^2`. That
/// keeps the integrand finite even when the rounded turning point gives
/// `R = 0` exactly. The polished endpoints sit within a unit or so of
/// round-off from the true roots, so the residual energy there is pure
/// evaluation noise; the dip it carves into the transformed integrand is
/// orders of magnitude narrower than any quadrature panel, and the computed
/// value therefore matches the integral taken from the exact root.
struct Well {
    lo: f64,
    hi: f64,
    rho_lo: f64,
    rho_hi: f64,
    mid: f64,
    left_mid: f64,
    right_mid: f64,
}

const ARC_TOL: f64 = 1e-11;

impl Well {
    fn build(en: &Energy, lo: f64, hi: f64) -> Result<Self, ConstraintsError> {
        if !(lo < hi) {
            return Err(ConstraintsError::InvalidParams(format!(
                "degenerate orbit interval [{lo}, {hi}]"
            )));
        }
        let mut well = Well {
            lo,
            hi,
            rho_lo: en.r_prime(lo),
            rho_hi: en.r_prime(hi),
            mid: 0.5 * (lo + hi),
            left_mid: 0.0,
            right_mid: 0.0,
        };
        well.left_mid = well.left_arc(en, well.mid)?;
        well.right_mid = well.right_arc(en, well.mid)?;
        Ok(well)
    }

    /// `int_lo^s d sigma / sqrt(R)` through the lower turning point.
    fn left_arc(&self, en: &Energy, s: f64) -> Result<f64, ConstraintsError> {
        let span = s - self.lo;
        if span <= 0.0 {
            return Ok(0.0);
        }
        let base = en.r(self.lo).max(0.0);
        let (lo, rho) = (self.lo, self.rho_lo);
        let cross = 1e-12 * (1.0 + lo.abs());
        let g = |tau: f64| {
            let delta = tau * tau;
            let rv = if delta <= cross { base + rho * delta } else { en.r(lo + delta) };
            2.0 * tau / rv.sqrt()
        };
        Ok(crate::quad::integrate(g, 0.0, span.sqrt(), ARC_TOL)?.value)
    }

    /// `int_s^hi d sigma / sqrt(R)` through the upper turning point.
    fn right_arc(&self, en: &Energy, s: f64) -> Result<f64, ConstraintsError> {
        let span = self.hi - s;
        if span <= 0.0 {
            return Ok(0.0);
        }
        let base = en.r(self.hi).max(0.0);
        let (hi, rho) = (self.hi, self.rho_hi);
        let cross = 1e-12 * (1.0 + hi.abs());
        let g = |tau: f64| {
            let delta = tau * tau;
            // rho < 0 at the upper turning point, so the model grows inward.
            let rv = if delta <= cross { base - rho * delta } else { en.r(hi - delta) };
            2.0 * tau / rv.sqrt()
        };
        Ok(crate::quad::integrate(g, 0.0, span.sqrt(), ARC_TOL)?.value)
    }

    /// Arc length from the lower turning point to `phi`.
    fn arc_from_lo(&self, en: &Energy, phi: f64) -> Result<f64, ConstraintsError> {
        let phi = phi.clamp(self.lo, self.hi);
        if phi <= self.mid {
            self.left_arc(en, phi)
        } else {
            Ok(self.left_mid + (self.right_mid - self.right_arc(en, phi)?))
        }
    }

    /// Half-period: arc length over the whole well.
    fn half_period(&self) -> f64 {
        self.left_mid + self.right_mid
    }

    /// Invert `arc_from_lo(phi) = target` for `target` in `[0, H]`.
    fn invert(&self, en: &Energy, target: f64, h_half: f64) -> Result<f64, ConstraintsError> {
        if target <= 0.0 {
            return Ok(self.lo);
        }
        if target >= h_half {
            return Ok(self.hi);
        }
        let failure: Cell<Option<ConstraintsError>> = Cell::new(None);
        let f = |phi: f64| match self.arc_from_lo(en, phi) {
            Ok(v) => v - target,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        };
        match brent(f, self.lo, self.hi, 1e-13, 5e-11) {
            Ok(phi) => Ok(phi),
            Err(e) => Err(failure.take().unwrap_or(ConstraintsError::Root(e))),
        }
    }
}

/// An orbit of the profile equation sampled two independent ways.
#[derive(Debug, Clone)]
pub struct PhiOrbit {
    pub ys: Vec<f64>,
    /// Direct integration of `phi'' = R'(phi)/2`.
    pub ode: Vec<f64>,
    /// Quadrature inversion of `int d phi / sqrt(R(phi)) = y`, folded over
    /// the turning points.
    pub quadrature: Vec<f64>,
}

/// Sample the orbit of `phi'' + (m/(2(m+1))) phi^{2m-1} + lambda phi = 0`
/// through the state `phi0 = (phi, phi')` at `y = 0`, over `[0, y_max]`.
///
/// The first integral `phi'^2 = R(phi)` with
/// `R(phi) = C0 - phi^{2m}/(2(m+1)) - lambda phi^2` must hold at the initial
/// state; its defect is checked first. Both a direct integration and a
/// quadrature inversion of the first integral are returned so they can be
/// cross-checked. Requires `m >= 1`.
pub fn phi_orbit(
    m: f64,
    lambda: f64,
    c0: f64,
    phi0: (f64, f64),
    y_max: f64,
    nsamples: usize,
) -> Result<PhiOrbit, ConstraintsError> {
    if !(m.is_finite() && m >= 1.0) {
        return Err(ConstraintsError::InvalidParams(format!(
            "orbit sampling requires finite m >= 1, got {m}"
        )));
    }
    if !(lambda.is_finite() && c0.is_finite() && phi0.0.is_finite() && phi0.1.is_finite()) {
        return Err(ConstraintsError::InvalidParams(
            "orbit parameters must be finite".into(),
        ));
    }
    if !(y_max.is_finite() && y_max > 0.0) || nsamples < 2 {
        return Err(ConstraintsError::InvalidParams(format!(
            "need positive y_max and at least two samples, got ({y_max}, {nsamples})"
        )));
    }
    let en = Energy { m, lambda, c0 };
    let (phi_start, dphi_start) = phi0;
    let defect = (dphi_start * dphi_start - en.r(phi_start)).abs();
    if defect > 1e-8 * en.scale() {
        return Err(ConstraintsError::InconsistentEnergy { defect });
    }
    let ys: Vec<f64> = (0..nsamples)
        .map(|i| y_max * i as f64 / (nsamples - 1) as f64)
        .collect();

    // Direct path: second-order dynamics as a first-order system.
    let rhs = |_y: f64, s: &[f64], ds: &mut [f64]| -> Result<(), String> {
        ds[0] = s[1];
        ds[1] = 0.5 * en.r_prime(s[0]);
        Ok(())
    };
    let tight = OdeOptions { rtol: 1e-12, atol: 1e-12, ..OdeOptions::default() };
    let states = ode::sample_path(&rhs, 0.0, &[phi_start, dphi_start], &ys, &tight)?;
    let ode_path: Vec<f64> = states.iter().map(|s| s[0]).collect();

    // Equilibrium: the state sits at a critical point of the energy.
    let r0 = en.r(phi_start);
    let rp0 = en.r_prime(phi_start);
    let tiny = 1e-10 * en.scale();
    if dphi_start.abs() <= tiny && r0.abs() <= tiny && rp0.abs() <= tiny {
        return Ok(PhiOrbit {
            quadrature: vec![phi_start; ys.len()],
            ys,
            ode: ode_path,
        });
    }

    // Quadrature path: locate the well around the initial state.
    let at_turn = r0.abs() <= 1e-9 * en.scale();
    let (lo, hi) = if at_turn && rp0 < 0.0 {
        let hi = nudge_nonnegative(&en, newton_polish(&en, phi_start), phi_start - 1.0);
        (march_to_root(&en, hi, -1.0)?, hi)
    } else if at_turn && rp0 > 0.0 {
        let lo = nudge_nonnegative(&en, newton_polish(&en, phi_start), phi_start + 1.0);
        (lo, march_to_root(&en, lo, 1.0)?)
    } else {
        (
            march_to_root(&en, phi_start, -1.0)?,
            march_to_root(&en, phi_start, 1.0)?,
        )
    };
    let well = Well::build(&en, lo, hi)?;
    let h_half = well.half_period();
    let arc0 = well.arc_from_lo(&en, phi_start)?;
    let theta0 = if dphi_start >= 0.0 { arc0 } else { 2.0 * h_half - arc0 };
    let mut quad_path = Vec::with_capacity(ys.len());
    for &y in &ys {
        let theta = (theta0 + y).rem_euclid(2.0 * h_half);
        let target = if theta <= h_half { theta } else { 2.0 * h_half - theta };
        quad_path.push(well.invert(&en, target, h_half)?);
    }
    Ok(PhiOrbit { ys, ode: ode_path, quadrature: quad_path })
}

/// Pointwise values of the second-order reciprocal constraint
/// `w_xx - w_x^2/w + (m/6) w (w^{m-1} - w^{1-m})`
/// on interior nodes (entry `k` belongs to node `k + 2`). Requires `w > 0`.
pub fn reciprocal_constraint_values(
    w: &Profile,
    m: f64,
) -> Result<Vec<f64>, ConstraintsError> {
    if !m.is_finite() {
        return Err(ConstraintsError::InvalidParams(format!("m must be finite, got {m}")));
    }
    check_positive_profile(w)?;
    let mut out = Vec::with_capacity(w.len().saturating_sub(4));
    for i in 2..w.len() - 2 {
        let wi = w.values[i];
        let wx = d1_o4(&w.values, i, w.dx);
        let wxx = d2_o4(&w.values, i, w.dx);
        let up = spow(wi, m - 1.0)?;
        let dn = spow(wi, 1.0 - m)?;
        out.push(wxx - wx * wx / wi + (m / 6.0) * wi * (up - dn));
    }
    Ok(out)
}

/// Max absolute value of the second-order reciprocal constraint.
pub fn reciprocal_constraint_residual(w: &Profile, m: f64) -> Result<f64, ConstraintsError> {
    Ok(reciprocal_constraint_values(w, m)?
        .into_iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// Pointwise values of the third-order reciprocal constraint for general
/// dispersion exponent `n`:
/// `(w^n - w^{2-n}) w_xxx
///  + [3((n+1) w^{1-n} + (n-1) w^{n-1}) w_xx + (m/n)(w^m - w^{2-m})] w_x
///  + (w^{n-2} (n^2-3n+2) - w^{-n} (n^2+3n+2)) w_x^3`
/// on interior nodes (entry `k` belongs to node `k + 3`). Requires `w > 0`.
/// At `n = 1` this expression is identically `6 w_x` times the second-order
/// constraint.
pub fn third_order_constraint_values(
    w: &Profile,
    m: f64,
    n: f64,
) -> Result<Vec<f64>, ConstraintsError> {
    if !(m.is_finite() && n.is_finite() && n != 0.0) {
        return Err(ConstraintsError::InvalidParams(format!(
            "need finite m and finite nonzero n, got ({m}, {n})"
        )));
    }
    if w.len() < 7 {
        return Err(ConstraintsError::InvalidParams(format!(
            "third-order stencil needs at least 7 samples, got {}",
            w.len()
        )));
    }
    check_positive_profile(w)?;
    let mut out = Vec::with_capacity(w.len().saturating_sub(6));
    for i in 3..w.len() - 3 {
        let wi = w.values[i];
        let wx = d1_o4(&w.values, i, w.dx);
        let wxx = d2_o4(&w.values, i, w.dx);
        let wxxx = d3_o4(&w.values, i, w.dx);
        let lead = spow(wi, n)? - spow(wi, 2.0 - n)?;
        let second = 3.0 * ((n + 1.0) * spow(wi, 1.0 - n)? + (n - 1.0) * spow(wi, n - 1.0)?);
        let convection = (m / n) * (spow(wi, m)? - spow(wi, 2.0 - m)?);
        let cubic = spow(wi, n - 2.0)? * (n * n - 3.0 * n + 2.0)
            - spow(wi, -n)? * (n * n + 3.0 * n + 2.0);
        out.push(lead * wxxx + (second * wxx + convection) * wx + cubic * wx * wx * wx);
    }
    Ok(out)
}

/// Max absolute value of the third-order reciprocal constraint.
pub fn third_order_constraint_residual(
    w: &Profile,
    m: f64,
    n: f64,
) -> Result<f64, ConstraintsError> {
    Ok(third_order_constraint_values(w, m, n)?
        .into_iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs())))
}

fn check_positive_profile(w: &Profile) -> Result<(), ConstraintsError> {
    for (i, &v) in w.values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(ConstraintsError::NonPositiveSample { x: w.x(i), value: v });
        }
    }
    Ok(())
}

fn check_positive_space_time(w: &SpaceTime) -> Result<(), ConstraintsError> {
    for row in &w.values {
        for (i, &v) in row.iter().enumerate() {
            if !(v > 0.0) {
                return Err(ConstraintsError::NonPositiveSample { x: w.x(i), value: v });
            }
        }
    }
    Ok(())
}

/// The first-integral constants `a = b = -m/(3(m-1))`; defined for `m != 1`.
pub fn first_integral_constants(m: f64) -> Result<(f64, f64), ConstraintsError> {
    if !(m.is_finite() && m != 1.0) {
        return Err(ConstraintsError::InvalidParams(format!(
            "the first-integral constants require finite m != 1, got {m}"
        )));
    }
    let a = -m / (3.0 * (m - 1.0));
    Ok((a, a))
}

/// An orbit of the reciprocal-constraint first integral, with the exact
/// slopes the integrator carried.
#[derive(Debug, Clone)]
pub struct SampledOrbit {
    pub profile: Profile,
    pub slopes: Vec<f64>,
}

impl SampledOrbit {
    /// Cubic reconstruction of the orbit as a callable function.
    pub fn table(&self) -> Result<HermiteTable, ConstraintsError> {
        Ok(HermiteTable::new(
            self.profile.x0,
            self.profile.dx,
            self.profile.values.clone(),
            self.slopes.clone(),
        )?)
    }
}

/// Integrate the first integral
/// `w_x^2 = a w^{m+1} + b w^{3-m} + K w^2`, `a = b = -m/(3(m-1))`,
/// from `w(0) = w0.0` with slope sign `w0.1` (+1 or -1), over `[0, length]`.
///
/// The integration uses the differentiated form
/// `w_xx = (a/2)(m+1) w^m + (b/2)(3-m) w^{2-m} + K w`, which passes
/// smoothly through turning points where the first-order form changes sign.
pub fn first_integral_orbit(
    m: f64,
    k_const: f64,
    w0: (f64, f64),
    length: f64,
    nsamples: usize,
) -> Result<SampledOrbit, ConstraintsError> {
    let (a, b) = first_integral_constants(m)?;
    if !(k_const.is_finite() && length.is_finite() && length > 0.0) || nsamples < 5 {
        return Err(ConstraintsError::InvalidParams(format!(
            "need finite K, positive length and at least 5 samples, got ({k_const}, {length}, {nsamples})"
        )));
    }
    let (w_start, sign) = w0;
    if sign.abs() != 1.0 {
        return Err(ConstraintsError::InvalidParams(format!(
            "slope sign must be +1 or -1, got {sign}"
        )));
    }
    if !(w_start > 0.0) {
        return Err(ConstraintsError::NonPositiveSample { x: 0.0, value: w_start });
    }
    let rhs0 = a * spow(w_start, m + 1.0)? + b * spow(w_start, 3.0 - m)?
        + k_const * w_start * w_start;
    if rhs0 < 0.0 {
        return Err(ConstraintsError::NegativeEnergy(rhs0));
    }
    let trouble = Cell::new(None);
    let rhs = |x: f64, s: &[f64], ds: &mut [f64]| -> Result<(), String> {
        let w = s[0];
        if !(w > 0.0) {
            trouble.set(Some((x, w)));
            return Err(format!("orbit left the positive domain at x = {x}"));
        }
        let wm = spow(w, m).map_err(|e| e.to_string())?;
        let w2m = spow(w, 2.0 - m).map_err(|e| e.to_string())?;
        ds[0] = s[1];
        ds[1] = 0.5 * a * (m + 1.0) * wm + 0.5 * b * (3.0 - m) * w2m + k_const * w;
        Ok(())
    };
    let dx = length / (nsamples - 1) as f64;
    let xs: Vec<f64> = (0..nsamples).map(|i| dx * i as f64).collect();
    let states = ode::sample_path(
        &rhs,
        0.0,
        &[w_start, sign * rhs0.sqrt()],
        &xs,
        &OdeOptions::default(),
    )
    .map_err(|e| match (&e, trouble.get()) {
        (OdeError::Rhs(_), Some((x, w))) => ConstraintsError::NonPositiveSample { x, value: w },
        _ => ConstraintsError::Ode(e),
    })?;
    let values: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let slopes: Vec<f64> = states.iter().map(|s| s[1]).collect();
    Ok(SampledOrbit {
        profile: Profile::new(0.0, dx, values)?,
        slopes,
    })
}

/// The characteristic speed `tau(w) = alpha w^{m-1} + beta w^{1-m} + K`
/// with `alpha = (a/2) m (m+1) + m`, `beta = (b/2)(m-3)(m-2)` and
/// `a = b = -m/(3(m-1))`. Requires `w > 0` and `m != 1`.
pub fn transport_speed(w: f64, m: f64, k_const: f64) -> Result<f64, ConstraintsError> {
    let (a, b) = first_integral_constants(m)?;
    if !k_const.is_finite() {
        return Err(ConstraintsError::InvalidParams(format!(
            "K must be finite, got {k_const}"
        )));
    }
    if !(w > 0.0) {
        return Err(ConstraintsError::NonPositiveSample { x: f64::NAN, value: w });
    }
    let alpha = 0.5 * a * m * (m + 1.0) + m;
    let beta = 0.5 * b * (m - 3.0) * (m - 2.0);
    Ok(alpha * spow(w, m - 1.0)? + beta * spow(w, 1.0 - m)? + k_const)
}

/// Solve the implicit profile relation `w = w0(x - tau(w) t)` for `w` by
/// bracketed root finding on `Phi(w) = w - w0(x - tau(w) t)`.
///
/// Failure to bracket a root is reported as [`ConstraintsError::NoCharacteristicRoot`]:
/// past the gradient catastrophe the relation stops defining a single-valued
/// profile, and this operation never papers over that.
pub fn characteristics_solve<F: Fn(f64) -> f64>(
    w0: F,
    x: f64,
    t: f64,
    m: f64,
    k_const: f64,
) -> Result<f64, ConstraintsError> {
    first_integral_constants(m)?;
    if !(x.is_finite() && t.is_finite()) {
        return Err(ConstraintsError::InvalidParams(format!(
            "need finite coordinates, got ({x}, {t})"
        )));
    }
    if t == 0.0 {
        return Ok(w0(x));
    }
    let phi = |w: f64| -> f64 {
        match transport_speed(w, m, k_const) {
            Ok(tau) => w - w0(x - tau * t),
            Err(_) => f64::NAN,
        }
    };
    let guess = w0(x).max(1e-9);
    let unit = 1.0 + guess.abs();
    for widen in [1.0, 2.0, 4.0, 8.0] {
        let lo = (guess - widen * unit).max(1e-9);
        let hi = guess + widen * unit;
        if let Some((a, b)) = scan_bracket(phi, lo, hi, 512) {
            if a == b {
                return Ok(a);
            }
            let w = brent(phi, a, b, 1e-15, 1e-13)?;
            if phi(w).abs() <= 1e-12 * (1.0 + w.abs()) {
                return Ok(w);
            }
        }
    }
    Err(ConstraintsError::NoCharacteristicRoot { x, t })
}

/// Finite-difference residual of the conservation form
/// `u_t + (u^m)_x + (u^n)_xxx` with unit coefficients, maximized over the
/// interior of a space-time sample.
pub fn equation_residual(u: &SpaceTime, m: f64, n: f64) -> Result<f64, ConstraintsError> {
    if !(m.is_finite() && n.is_finite()) {
        return Err(ConstraintsError::InvalidParams(format!(
            "need finite exponents, got ({m}, {n})"
        )));
    }
    let conv: Vec<Vec<f64>> = u
        .values
        .iter()
        .map(|row| row.iter().map(|&v| spow(v, m)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let disp: Vec<Vec<f64>> = u
        .values
        .iter()
        .map(|row| row.iter().map(|&v| spow(v, n)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let tm = u.t_margin();
    let mut worst = 0.0f64;
    for j in tm..u.nt() - tm {
        for i in 3..u.nx() - 3 {
            let ut = u.d1_time(j, i);
            let cx = d1_o4(&conv[j], i, u.dx);
            let dxxx = d3_o4(&disp[j], i, u.dx);
            worst = worst.max((ut + cx + dxxx).abs());
        }
    }
    Ok(worst)
}

/// Reciprocal-solution check: residuals of `w` under the equation, of `1/w`
/// under the same equation, and of `w` under the applicable constraint
/// (second-order for `n = 1`, third-order otherwise), as
/// `(res_w, res_recip, res_constraint)`.
pub fn reciprocal_pair_check(
    w: &SpaceTime,
    m: f64,
    n: f64,
) -> Result<(f64, f64, f64), ConstraintsError> {
    check_positive_space_time(w)?;
    let res_w = equation_residual(w, m, n)?;
    let recip_rows: Vec<Vec<f64>> = w
        .values
        .iter()
        .map(|row| row.iter().map(|&v| 1.0 / v).collect())
        .collect();
    let recip = SpaceTime::new(w.x0, w.dx, w.t0, w.dt, recip_rows)?;
    let res_recip = equation_residual(&recip, m, n)?;
    let mut res_constraint = 0.0f64;
    for row in &w.values {
        let prof = Profile::new(w.x0, w.dx, row.clone())?;
        let r = if n == 1.0 {
            reciprocal_constraint_residual(&prof, m)?
        } else {
            third_order_constraint_residual(&prof, m, n)?
        };
        res_constraint = res_constraint.max(r);
    }
    Ok((res_w, res_recip, res_constraint))
}

/// The spatial factor of a separated solution: dense Hermite samples of the
/// integrated power profile `F = f^n`, with `f = F^{1/n}` on evaluation.
#[derive(Debug, Clone)]
pub struct SeparationProfile {
    table: HermiteTable,
    n: f64,
}

impl SeparationProfile {
    pub fn x_min(&self) -> f64 {
        self.table.x_min()
    }

    pub fn x_max(&self) -> f64 {
        self.table.x_max()
    }

    /// The integrated profile `F(x) = f(x)^n`.
    pub fn eval_power(&self, x: f64) -> Result<f64, ConstraintsError> {
        Ok(self.table.eval(x)?)
    }

    /// The spatial factor `f(x) = F(x)^{1/n}`.
    pub fn eval(&self, x: f64) -> Result<f64, ConstraintsError> {
        let big = self.table.eval(x)?;
        root_branch(big, self.n, x)
    }
}

/// `base^{1/n}` on the real branch: the signed root for odd integer `n`,
/// defined only for non-negative bases otherwise.
fn root_branch(base: f64, n: f64, at: f64) -> Result<f64, ConstraintsError> {
    let p = 1.0 / n;
    if base < 0.0 {
        let odd_integer = n.fract() == 0.0 && (n as i64) % 2 != 0;
        if !odd_integer {
            return Err(ConstraintsError::NonRealPower(at));
        }
    }
    if base == 0.0 && p > 0.0 {
        return Ok(0.0);
    }
    Ok(spow(base, p)?)
}

/// The closed-form time factor of a separated solution:
/// `g(t) = c e^{lambda t}` for `n = 1`, otherwise the solution of
/// `g_t = lambda g^n` with `g^{n-1} = -1/((n-1)(lambda t + c))`.
#[derive(Debug, Clone, Copy)]
pub struct TimeFactor {
    pub n: f64,
    pub lambda: f64,
    pub c: f64,
}

impl TimeFactor {
    pub fn eval(&self, t: f64) -> Result<f64, ConstraintsError> {
        if self.n == 1.0 {
            return Ok(self.c * (self.lambda * t).exp());
        }
        let denom = self.lambda * t + self.c;
        if denom == 0.0 {
            return Err(ConstraintsError::BlowUpTime(t));
        }
        let base = -1.0 / ((self.n - 1.0) * denom);
        // g = base^{1/(n-1)} on the real branch.
        let order = self.n - 1.0;
        if base < 0.0 {
            let odd_integer = order.fract() == 0.0 && (order as i64) % 2 != 0;
            if !odd_integer {
                return Err(ConstraintsError::NonRealPower(t));
            }
        }
        Ok(spow(base, 1.0 / order)?)
    }

    /// The time where the factor leaves every bounded window, when one
    /// exists.
    pub fn blow_up_time(&self) -> Option<f64> {
        if self.n != 1.0 && self.lambda != 0.0 {
            Some(-self.c / self.lambda)
        } else {
            None
        }
    }
}

/// Separation of variables for equal exponents `m = n`: integrate the
/// spatial equation `F''' = -F' - lambda F^{1/n}` (where `F = f^n`) from the
/// state `f0 = (F, F', F'')` at `span.0`, and pair it with the closed-form
/// time factor. The product `u(x, t) = f(x) g(t)` then solves the equation
/// wherever the factor is finite.
pub fn separation_solve(
    n: f64,
    lambda: f64,
    f0: [f64; 3],
    span: (f64, f64),
    nsamples: usize,
    c: f64,
) -> Result<(SeparationProfile, TimeFactor), ConstraintsError> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(ConstraintsError::InvalidParams(format!(
            "separation needs finite n >= 1, got {n}"
        )));
    }
    if !(lambda.is_finite() && c.is_finite()) {
        return Err(ConstraintsError::InvalidParams(
            "lambda and c must be finite".into(),
        ));
    }
    let (x0, x1) = span;
    if !x0.is_finite() || !x1.is_finite() || x0 == x1 || nsamples < 2 {
        return Err(ConstraintsError::InvalidParams(format!(
            "need a nondegenerate span and two samples, got ({x0}, {x1}) with {nsamples}"
        )));
    }
    let trouble = Cell::new(None);
    let rhs = |x: f64, s: &[f64], ds: &mut [f64]| -> Result<(), String> {
        ds[0] = s[1];
        ds[1] = s[2];
        let f_val = root_branch(s[0], n, x).map_err(|_| {
            trouble.set(Some(x));
            format!("power profile left the real domain at x = {x}")
        })?;
        ds[2] = -s[1] - lambda * f_val;
        Ok(())
    };
    let h = (x1 - x0) / (nsamples - 1) as f64;
    let xs: Vec<f64> = (0..nsamples).map(|i| x0 + h * i as f64).collect();
    let states = ode::sample_path(&rhs, x0, &f0, &xs, &OdeOptions::default()).map_err(|e| {
        match (&e, trouble.get()) {
            (OdeError::Rhs(_), Some(x)) => ConstraintsError::NonRealPower(x),
            _ => ConstraintsError::Ode(e),
        }
    })?;
    let mut values: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let mut slopes: Vec<f64> = states.iter().map(|s| s[1]).collect();
    let table_x0 = if h > 0.0 { x0 } else { x1 };
    if h < 0.0 {
        values.reverse();
        slopes.reverse();
    }
    let table = HermiteTable::new(table_x0, h.abs(), values, slopes)?;
    Ok((
        SeparationProfile { table, n },
        TimeFactor { n, lambda, c },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{diff1_fn, diff3_fn};
    use proptest::prelude::*;

    #[test]
    fn zero_wave_function_has_zero_residual() {
        let psi = Profile::from_fn(0.0, 0.1, 64, |_| 0.0).unwrap();
        let u = Profile::from_fn(0.0, 0.1, 64, |x| 1.0 + x * x).unwrap();
        assert_eq!(schrodinger_residual(&psi, &u, 3.0, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn linear_case_has_constant_coefficient() {
        // For m = 1 the potential term is 1/4 regardless of u, so
        // psi = sin(sqrt(lambda + 1/4) x) solves the constraint for any u.
        let lambda = 0.6f64;
        let nu = (lambda + 0.25).sqrt();
        let psi = Profile::from_fn(0.0, 0.01, 900, |x| (nu * x).sin()).unwrap();
        let u = Profile::from_fn(0.0, 0.01, 900, |x| 2.0 + (3.0 * x).cos()).unwrap();
        assert!(schrodinger_residual(&psi, &u, 1.0, lambda).unwrap() < 1e-8);
    }

    #[test]
    fn singular_potential_power_is_reported() {
        let psi = Profile::from_fn(0.0, 0.1, 16, |x| x).unwrap();
        let mut vals = vec![1.0; 16];
        vals[7] = 0.0;
        let u = Profile::new(0.0, 0.1, vals).unwrap();
        assert!(matches!(
            schrodinger_residual(&psi, &u, 0.5, 0.0),
            Err(ConstraintsError::Model(_))
        ));
        let v = Profile::from_fn(0.0, 0.05, 16, |x| x).unwrap();
        assert!(matches!(
            schrodinger_residual(&psi, &v, 2.0, 0.0),
            Err(ConstraintsError::GridMismatch(_))
        ));
    }

    #[test]
    fn constant_product_transport_vanishes_exactly() {
        // f g = 1 identically, so f(g_t - 4 lambda g_x) + g(f_t - 4 lambda f_x)
        // is -4 lambda (fg)_x = 0 up to stencil round-off.
        let f = SpaceTime::from_fn(0.0, 0.05, 40, 0.0, 0.01, 5, |x, _| x.exp()).unwrap();
        let g = SpaceTime::from_fn(0.0, 0.05, 40, 0.0, 0.01, 5, |x, _| (-x).exp()).unwrap();
        assert!(factored_transport_residual(&f, &g, 0.9).unwrap() < 1e-12);
    }

    #[test]
    fn characteristic_profiles_have_zero_transport() {
        // Any function of x + 4 lambda t alone is annihilated.
        let lambda = 0.75;
        let f = SpaceTime::from_fn(0.0, 0.02, 120, 0.0, 0.005, 7, |x, t| {
            (x + 4.0 * lambda * t).sin() + 2.0
        })
        .unwrap();
        assert!(factored_transport_residual(&f, &f, lambda).unwrap() < 1e-7);
    }

    proptest! {
        // The coefficient chain must reproduce the closed forms exactly for
        // every admissible rational m.
        #[test]
        fn ansatz_constants_match_closed_forms(p in -60i64..60, q in 1i64..12) {
            let m = rat(p, q);
            prop_assume!(m != rat(-1, 1));
            let (a, b, qq) = ansatz_constants(&m).unwrap();
            let denom = m.clone() + Rat::one();
            prop_assert_eq!(a.clone(), rat(2, 1) * &m / denom.clone());
            prop_assert_eq!(b.clone(), m.clone() * (m.clone() - Rat::one()) / denom.clone());
            prop_assert_eq!(qq, -(m.clone() / (rat(2, 1) * denom)));
            // The chain relations themselves.
            prop_assert_eq!(a.clone() + b.clone(), m.clone());
        }
    }

    #[test]
    fn orbit_paths_reproduce_the_exact_sine() {
        // m = 1, lambda = 3/4, C0 = 1: the orbit is sin(y) exactly, with
        // amplitude 2 sqrt(C0/(4 lambda + 1)) = 1 and unit frequency.
        let orbit = phi_orbit(1.0, 0.75, 1.0, (0.0, 1.0), 6.4, 65).unwrap();
        for (i, &y) in orbit.ys.iter().enumerate() {
            assert!((orbit.ode[i] - y.sin()).abs() < 1e-8, "direct path at y = {y}");
            assert!(
                (orbit.quadrature[i] - y.sin()).abs() < 1e-8,
                "quadrature path at y = {y}: {} vs {}",
                orbit.quadrature[i],
                y.sin()
            );
        }
    }

    #[test]
    fn orbit_starting_at_a_turning_point_folds_correctly() {
        // Starting at the apex phi = 1 with zero slope gives cos(y).
        let orbit = phi_orbit(1.0, 0.75, 1.0, (1.0, 0.0), 6.0, 61).unwrap();
        for (i, &y) in orbit.ys.iter().enumerate() {
            assert!((orbit.ode[i] - y.cos()).abs() < 1e-8);
            assert!((orbit.quadrature[i] - y.cos()).abs() < 1e-8, "at y = {y}");
        }
    }

    #[test]
    fn orbit_paths_agree_for_quartic_energy() {
        // m = 2: no elementary closed form; the two independent paths must
        // agree over more than one full period.
        let m = 2.0;
        let (lambda, c0) = (0.5, 0.8);
        let phi_start = 0.2;
        let en = Energy { m, lambda, c0 };
        let orbit = phi_orbit(m, lambda, c0, (phi_start, en.r(phi_start).sqrt()), 8.0, 49).unwrap();
        for i in 0..orbit.ys.len() {
            assert!(
                (orbit.ode[i] - orbit.quadrature[i]).abs() < 1e-8,
                "paths split at y = {}: {} vs {}",
                orbit.ys[i],
                orbit.ode[i],
                orbit.quadrature[i]
            );
        }
    }

    #[test]
    fn resting_state_at_zero_energy_stays_put() {
        let orbit = phi_orbit(2.0, 0.3, 0.0, (0.0, 0.0), 4.0, 17).unwrap();
        assert!(orbit.ode.iter().all(|&v| v.abs() < 1e-12));
        assert!(orbit.quadrature.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_defect_is_rejected_with_its_value() {
        let err = phi_orbit(1.0, 0.75, 1.0, (0.0, 2.0), 4.0, 17).unwrap_err();
        match err {
            ConstraintsError::InconsistentEnergy { defect } => {
                assert!((defect - 3.0).abs() < 1e-12, "defect = {defect}");
            }
            other => panic!("expected an energy defect, got {other:?}"),
        }
    }

    #[test]
    fn constant_one_satisfies_the_reciprocal_constraint_exactly() {
        let w = Profile::from_fn(0.0, 0.1, 32, |_| 1.0).unwrap();
        assert_eq!(reciprocal_constraint_residual(&w, 2.0).unwrap(), 0.0);
        assert_eq!(third_order_constraint_residual(&w, 2.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn exponential_violates_the_constraint_by_the_predicted_amount() {
        // w = e^x, m = 2: the constraint evaluates to (1/3) e^x (e^x - e^{-x}).
        let w = Profile::from_fn(0.0, 0.01, 201, |x| x.exp()).unwrap();
        let vals = reciprocal_constraint_values(&w, 2.0).unwrap();
        let x = w.x(100);
        let expected = x.exp() * (x.exp() - (-x).exp()) / 3.0;
        let got = vals[98]; // entry k is node k + 2
        assert!((got - expected).abs() < 1e-5, "{got} vs {expected}");
        assert!(got.abs() > 0.3);
    }

    #[test]
    fn positivity_is_enforced() {
        let w = Profile::from_fn(-1.0, 0.1, 32, |x| x).unwrap();
        assert!(matches!(
            reciprocal_constraint_residual(&w, 2.0),
            Err(ConstraintsError::NonPositiveSample { .. })
        ));
    }

    #[test]
    fn third_order_form_reduces_to_the_second_order_form_at_unit_n() {
        // At n = 1 the third-order expression equals 6 w_x times the
        // second-order one, stencil for stencil.
        for f in [
            (|x: f64| x) as fn(f64) -> f64,
            |x: f64| x * x,
            |x: f64| x.exp(),
            |x: f64| 1.0 + x * x,
        ] {
            let w = Profile::from_fn(0.5, 0.025, 121, f).unwrap();
            let second = reciprocal_constraint_values(&w, 2.5).unwrap();
            let third = third_order_constraint_values(&w, 2.5, 1.0).unwrap();
            for (k, &t3) in third.iter().enumerate() {
                let node = k + 3;
                let wx = d1_o4(&w.values, node, w.dx);
                let t2 = second[node - 2];
                let scale = 1.0 + t3.abs().max((6.0 * wx * t2).abs());
                assert!(
                    (t3 - 6.0 * wx * t2).abs() < 1e-9 * scale,
                    "node {node}: {t3} vs {}",
                    6.0 * wx * t2
                );
            }
        }
    }

    #[test]
    fn equilibrium_choice_of_k_freezes_the_orbit() {
        // K = 2m/(3(m-1)) makes w = 1 a rest point of the first integral.
        let m = 3.0;
        let k = 2.0 * m / (3.0 * (m - 1.0));
        let orbit = first_integral_orbit(m, k, (1.0, 1.0), 5.0, 101).unwrap();
        assert!(orbit.profile.values.iter().all(|&w| (w - 1.0).abs() < 1e-9));
    }

    #[test]
    fn quadratic_orbit_stays_between_the_energy_roots() {
        // m = 2, K = 2: the slope vanishes at w = (3 +- sqrt(5))/2; the orbit
        // oscillates between those roots and satisfies both the constraint
        // and the differentiated first integral.
        let orbit = first_integral_orbit(2.0, 2.0, (1.0, 1.0), 12.0, 1201).unwrap();
        let lo = (3.0 - 5.0f64.sqrt()) / 2.0;
        let hi = (3.0 + 5.0f64.sqrt()) / 2.0;
        let min = orbit.profile.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = orbit.profile.values.iter().cloned().fold(0.0f64, f64::max);
        assert!(min > lo - 1e-6 && max < hi + 1e-6, "range [{min}, {max}]");
        assert!(max > hi - 0.05, "orbit must actually reach the upper root");
        // Second-order constraint residual by finite differences.
        assert!(reciprocal_constraint_residual(&orbit.profile, 2.0).unwrap() < 1e-6);
        // Differentiated first integral: w_x^2 - (a w^3 + b w + K w^2) -> 0.
        let (a, b) = first_integral_constants(2.0).unwrap();
        let w = &orbit.profile;
        let mut worst = 0.0f64;
        for i in 2..w.len() - 2 {
            let wx = d1_o4(&w.values, i, w.dx);
            let wi = w.values[i];
            let rhs = a * wi * wi * wi + b * wi + 2.0 * wi * wi;
            worst = worst.max((wx * wx - rhs).abs());
        }
        assert!(worst < 1e-8, "first-integral defect {worst:.3e}");
        let _ = b;
    }

    #[test]
    fn negative_initial_energy_is_rejected() {
        // m = 2, K = 0: rhs(1) = a + b = -4/3 < 0.
        assert!(matches!(
            first_integral_orbit(2.0, 0.0, (1.0, 1.0), 4.0, 33),
            Err(ConstraintsError::NegativeEnergy(_))
        ));
        assert!(matches!(
            first_integral_orbit(2.0, 2.0, (-1.0, 1.0), 4.0, 33),
            Err(ConstraintsError::NonPositiveSample { .. })
        ));
    }

    #[test]
    fn transport_speed_collapses_to_k_for_special_exponents() {
        // At m = 2 and m = 3 both speed coefficients vanish identically.
        for m in [2.0, 3.0] {
            for w in [0.3, 1.0, 2.7] {
                assert!((transport_speed(w, m, 1.4).unwrap() - 1.4).abs() < 1e-14);
            }
        }
        // m = 4: alpha = beta = -4/9, so tau(1) = K - 8/9.
        let tau = transport_speed(1.0, 4.0, 1.0).unwrap();
        assert!((tau - (1.0 - 8.0 / 9.0)).abs() < 1e-13);
    }

    #[test]
    fn characteristics_start_from_the_initial_profile() {
        let w0 = |s: f64| 1.5 + 0.3 * s.sin();
        let w = characteristics_solve(w0, 0.7, 0.0, 4.0, 1.0).unwrap();
        assert_eq!(w, w0(0.7));
        // Constant data is a fixed point of the flow at any time.
        let c = characteristics_solve(|_| 2.3, -1.0, 0.8, 5.0, 1.7).unwrap();
        assert!((c - 2.3).abs() < 1e-10);
    }

    #[test]
    fn constant_speed_case_translates_rigidly() {
        // m = 2 has tau = K, so the profile translates at exactly K.
        let w0 = |s: f64| 1.5 + 0.3 * s.sin();
        for (x, t) in [(0.0, 0.1), (1.0, 0.5), (-2.0, 0.25)] {
            let w = characteristics_solve(w0, x, t, 2.0, 2.0).unwrap();
            assert!((w - w0(x - 2.0 * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn broken_profile_reports_no_root() {
        // With m = 4 the speed diverges like -w^3 for large w and like
        // -w^{-3} near zero; steep initial data then admits (x, t) where
        // Phi(w) = w - w0(x - tau(w) t) is negative for every positive w.
        let w0 = |s: f64| s * s + 5.0;
        assert!(matches!(
            characteristics_solve(w0, 0.0, 1.0, 4.0, 0.0),
            Err(ConstraintsError::NoCharacteristicRoot { .. })
        ));
    }

    #[test]
    fn unit_function_passes_every_reciprocal_check() {
        let w = SpaceTime::from_fn(0.0, 0.1, 16, 0.0, 0.01, 5, |_, _| 1.0).unwrap();
        let (rw, rr, rc) = reciprocal_pair_check(&w, 2.0, 1.0).unwrap();
        assert_eq!((rw, rr, rc), (0.0, 0.0, 0.0));
        let (rw, rr, rc) = reciprocal_pair_check(&w, 2.0, 3.0).unwrap();
        assert_eq!((rw, rr, rc), (0.0, 0.0, 0.0));
    }

    #[test]
    fn factored_family_runs_the_whole_first_proposition_pipeline() {
        // phi = sin(x + 4 lambda t + a) with lambda = 3/4, amplitude and
        // frequency 1: phi solves the pointwise constraint with u = phi^2,
        // the pair (phi, phi) solves the transport equation, and u solves
        // the m = 1 equation.
        let lambda = 0.75;
        let phi = |x: f64, t: f64| (x + 4.0 * lambda * t + 0.3).sin();
        let (x0, dx, nx) = (0.0, 0.005, 1200);
        let (t0, dt, nt) = (0.0, 0.004, 7);
        let phi_st = SpaceTime::from_fn(x0, dx, nx, t0, dt, nt, phi).unwrap();
        assert!(factored_transport_residual(&phi_st, &phi_st, lambda).unwrap() < 1e-6);
        let psi = Profile::from_fn(x0, dx, nx, |x| phi(x, 0.0)).unwrap();
        let u_prof = Profile::from_fn(x0, dx, nx, |x| phi(x, 0.0).powi(2)).unwrap();
        assert!(schrodinger_residual(&psi, &u_prof, 1.0, lambda).unwrap() < 1e-7);
        let u_st = SpaceTime::from_fn(x0, dx, nx, t0, dt, nt, |x, t| phi(x, t).powi(2)).unwrap();
        assert!(equation_residual(&u_st, 1.0, 1.0).unwrap() < 1e-6);
    }

    #[test]
    fn time_factor_solves_its_own_flow() {
        // Closed forms must satisfy g_t = lambda g^n; checked by high-order
        // differences for an integer and a fractional-root case.
        let g2 = TimeFactor { n: 2.0, lambda: 1.0, c: 1.0 };
        assert!((g2.eval(0.0).unwrap() + 1.0).abs() < 1e-14);
        for t in [0.0, 0.5, 2.0] {
            let gt = diff1_fn(|s| g2.eval(s).unwrap(), t, 1e-3);
            let g = g2.eval(t).unwrap();
            assert!((gt - g * g).abs() < 1e-9, "n = 2 flow at t = {t}");
        }
        assert!(matches!(g2.eval(-1.0), Err(ConstraintsError::BlowUpTime(_))));
        assert_eq!(g2.blow_up_time(), Some(-1.0));
        let g3 = TimeFactor { n: 3.0, lambda: 1.0, c: -2.0 };
        for t in [0.0, 0.9, 1.6] {
            let gt = diff1_fn(|s| g3.eval(s).unwrap(), t, 1e-4);
            let g = g3.eval(t).unwrap();
            assert!((gt - g * g * g).abs() < 1e-8, "n = 3 flow at t = {t}");
        }
        // Past the blow-up the even-root base goes negative.
        assert!(matches!(g3.eval(3.0), Err(ConstraintsError::NonRealPower(_))));
        let g1 = TimeFactor { n: 1.0, lambda: 0.7, c: 2.5 };
        assert!((g1.eval(0.0).unwrap() - 2.5).abs() < 1e-14);
        assert_eq!(g1.blow_up_time(), None);
    }

    #[test]
    fn drift_free_spatial_equation_reproduces_sine() {
        // lambda = 0 reduces the spatial equation to F' + F''' = 0;
        // F = sin(x) solves it exactly on a window where sin stays positive.
        let x0 = 0.3f64;
        let (profile, factor) =
            separation_solve(2.0, 0.0, [x0.sin(), x0.cos(), -x0.sin()], (x0, 2.8), 401, -1.0)
                .unwrap();
        for i in 0..=50 {
            let x = x0 + (2.8 - x0) * i as f64 / 50.0;
            assert!((profile.eval_power(x).unwrap() - x.sin()).abs() < 1e-8);
            assert!((profile.eval(x).unwrap() - x.sin().sqrt()).abs() < 1e-7);
        }
        // With lambda = 0 the factor is the constant -1/c.
        assert!((factor.eval(5.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn separated_product_solves_the_equation() {
        // n = m = 2, lambda = 1, c = 1: g(t) = -1/(t + 1); the product
        // f(x) g(t) must zero the full equation away from the blow-up.
        let n = 2.0;
        let x_lo = 0.35f64;
        let (profile, factor) = separation_solve(
            n,
            1.0,
            [x_lo.sin(), x_lo.cos(), -x_lo.sin()],
            (x_lo, 2.2),
            1601,
            1.0,
        )
        .unwrap();
        let u = |x: f64, t: f64| profile.eval(x).unwrap() * factor.eval(t).unwrap();
        let mut worst = 0.0f64;
        for i in 0..12 {
            let x = 0.6 + 1.4 * i as f64 / 11.0;
            for t in [0.0, 0.4, 1.1] {
                let ut = diff1_fn(|s| u(x, s), t, 1e-3);
                let conv = diff1_fn(|s| u(s, t).powi(2), x, 1e-2);
                let disp = diff3_fn(|s| u(s, t).powi(2), x, 1e-2);
                worst = worst.max((ut + conv + disp).abs());
            }
        }
        assert!(worst < 1e-6, "separated residual {worst:.3e}");
    }

    #[test]
    fn linear_separation_couples_exponential_growth() {
        // n = m = 1: u = f(x) c e^{lambda t} with F''' = -F' - lambda F.
        let lambda = 0.4;
        let (profile, factor) =
            separation_solve(1.0, lambda, [0.8, 0.1, -0.3], (0.0, 4.0), 801, 1.3).unwrap();
        let u = |x: f64, t: f64| profile.eval(x).unwrap() * factor.eval(t).unwrap();
        let mut worst = 0.0f64;
        for i in 0..10 {
            let x = 0.5 + 3.0 * i as f64 / 9.0;
            for t in [0.0, 0.6] {
                let ut = diff1_fn(|s| u(x, s), t, 1e-3);
                let conv = diff1_fn(|s| u(s, t), x, 1e-2);
                let disp = diff3_fn(|s| u(s, t), x, 1e-2);
                worst = worst.max((ut + conv + disp).abs());
            }
        }
        assert!(worst < 1e-7, "linear separated residual {worst:.3e}");
    }

    #[test]
    fn spatial_profile_leaving_the_real_domain_is_reported() {
        // n = 2 with F forced negative: F(x0) = 0 with negative slope.
        assert!(matches!(
            separation_solve(2.0, 0.5, [0.0, -1.0, 0.0], (0.0, 2.0), 65, 1.0),
            Err(ConstraintsError::NonRealPower(_))
        ));
    }

    #[test]
    fn constraint_specs_validate_their_exponents() {
        assert!(ConstraintSpec::new(ConstraintKind::Reciprocal49, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ConstraintSpec::new(ConstraintKind::Transport414, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ConstraintSpec::new(ConstraintKind::Separation420, 2.0, 3.0, 0.0, 0.0).is_err());
        assert!(ConstraintSpec::new(ConstraintKind::Separation420, 2.0, 2.0, 1.0, 0.0).is_ok());
        assert!(ConstraintSpec::new(ConstraintKind::Schrodinger41, 1.0, 1.0, 0.75, 0.0).is_ok());
    }

    #[test]
    fn characteristics_pipeline_satisfies_both_propositions() {
        // Build initial data from the first integral (m = 2, K = 2), flow it
        // with the characteristics solver, and check: the transported profile
        // solves the equation, its reciprocal solves the equation, the
        // second-order constraint holds, and the transport form itself holds.
        let m = 2.0;
        let k = 2.0;
        let orbit = first_integral_orbit(m, k, (1.0, 1.0), 12.0, 2401).unwrap();
        let table = orbit.table().unwrap();
        let w0 = |s: f64| table.eval(s).unwrap();
        let (x0, dx, nx) = (5.0, 0.02, 101);
        let (t0, dt, nt) = (0.0, 2e-4, 5);
        let w_st = SpaceTime::from_fn(x0, dx, nx, t0, dt, nt, |x, t| {
            characteristics_solve(w0, x, t, m, k).unwrap()
        })
        .unwrap();
        let (res_w, res_recip, res_constraint) = reciprocal_pair_check(&w_st, m, 1.0).unwrap();
        assert!(res_w < 1e-5, "equation residual of w: {res_w:.3e}");
        assert!(res_recip < 1e-5, "equation residual of 1/w: {res_recip:.3e}");
        assert!(res_constraint < 1e-6, "constraint residual: {res_constraint:.3e}");
        // Transport form tau(w) w_x + w_t with tau = K.
        let tm = w_st.t_margin();
        let mut transport = 0.0f64;
        for j in tm..nt - tm {
            for i in 2..nx - 2 {
                let wx = d1_o4(&w_st.values[j], i, dx);
                let wt = w_st.d1_time(j, i);
                transport = transport.max((k * wx + wt).abs());
            }
        }
        assert!(transport < 1e-6, "transport residual {transport:.3e}");
    }
}
