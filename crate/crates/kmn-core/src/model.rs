//! Problem definition: coefficients, grids, signed powers, the pointwise
//! flux divergence, and conservation-law densities and fluxes for
//!
//! ```text
//! u_t + kappa * (u^m)_x + delta * (u^n)_xxx = 0
//! ```
//!
//! Everything here is pointwise or quadrature-level; time stepping and
//! discrete spatial operators live in [`crate::solver`].

use crate::fd;
use thiserror::Error;

/// Values closer to zero than this are treated as singular when a negative
/// exponent asks for them.
pub const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("signed power of zero is undefined for exponent {exponent} <= 0")]
    ZeroToNonPositivePower { exponent: f64 },
    #[error("negative exponent {exponent} hit near-zero value {u}")]
    SingularNode { u: f64, exponent: f64 },
    #[error("exponents must be finite with m >= 0 and n >= 1, got m = {m}, n = {n}")]
    InvalidExponents { m: f64, n: f64 },
    #[error("coefficients must be finite, got kappa = {kappa}, delta = {delta}")]
    InvalidCoefficients { kappa: f64, delta: f64 },
    #[error("grid needs at least 8 points, got {0}")]
    GridTooSmall(usize),
    #[error("grid length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("{law} flux is only implemented for n = 1, got n = {n}")]
    UnsupportedLaw { law: &'static str, n: f64 },
    #[error("field has {field} values but the grid has {grid} points")]
    FieldMismatch { field: usize, grid: usize },
}

/// Exponents and coefficients of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmnParams {
    pub m: f64,
    pub n: f64,
    pub kappa: f64,
    pub delta: f64,
}

impl KmnParams {
    /// Both coefficients set to one.
    pub fn new(m: f64, n: f64) -> Result<Self, ModelError> {
        Self::with_coefficients(m, n, 1.0, 1.0)
    }

    pub fn with_coefficients(
        m: f64,
        n: f64,
        kappa: f64,
        delta: f64,
    ) -> Result<Self, ModelError> {
        if !m.is_finite() || !n.is_finite() || m < 0.0 || n < 1.0 {
            return Err(ModelError::InvalidExponents { m, n });
        }
        if !kappa.is_finite() || !delta.is_finite() {
            return Err(ModelError::InvalidCoefficients { kappa, delta });
        }
        Ok(KmnParams { m, n, kappa, delta })
    }
}

/// Uniform periodic grid: nodes x_i = x0 + i * dx for i in 0..npoints, with
/// period `length` (the right endpoint is identified with x0).
#[derive(Debug, Clone, Copy)]
pub struct Grid1D {
    x0: f64,
    length: f64,
    npoints: usize,
}

impl Grid1D {
    pub fn new(x0: f64, length: f64, npoints: usize) -> Result<Self, ModelError> {
        if npoints < 8 {
            return Err(ModelError::GridTooSmall(npoints));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(ModelError::BadLength(length));
        }
        Ok(Grid1D { x0, length, npoints })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.npoints as f64
    }

    pub fn len(&self) -> usize {
        self.npoints
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx() * i as f64
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.npoints).map(|i| self.x(i)).collect()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        (0..self.npoints).map(|i| f(self.x(i))).collect()
    }
}

/// Nodal values on a [`Grid1D`], in node order.
pub type Field = Vec<f64>;

/// Signed power: `u.powi(p)` when `p` is an integer, otherwise
/// `sign(u) * |u|^p`, so odd-root laws act on negative values the way the
/// real branch does (e.g. `spow(-4.0, 0.5) == -2.0`). Zero raised to a
/// positive power is zero; zero to a non-positive power is an error.
pub fn spow(u: f64, p: f64) -> Result<f64, ModelError> {
    if u == 0.0 {
        return if p > 0.0 {
            Ok(0.0)
        } else {
            Err(ModelError::ZeroToNonPositivePower { exponent: p })
        };
    }
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        Ok(u.powi(p as i32))
    } else {
        Ok(u.signum() * u.abs().powf(p))
    }
}

/// [`spow`] with the conventions the flux assembly needs: exponent zero is
/// exactly one regardless of `u`, and a negative exponent within
/// [`SINGULAR_EPS`] of zero reports the singular node instead of blowing up.
pub(crate) fn power_factor(u: f64, p: f64) -> Result<f64, ModelError> {
    if p == 0.0 {
        return Ok(1.0);
    }
    if p < 0.0 && u.abs() < SINGULAR_EPS {
        return Err(ModelError::SingularNode { u, exponent: p });
    }
    spow(u, p)
}

/// The spatial part `kappa * (u^m)_x + delta * (u^n)_xxx` evaluated at one
/// point from the derivative jet, with every power written out by the chain
/// rule:
///
/// ```text
/// (u^m)_x   = m u^(m-1) u_x
/// (u^n)_xxx = n(n-1)(n-2) u^(n-3) u_x^3 + 3n(n-1) u^(n-2) u_x u_xx
///             + n u^(n-1) u_xxx
/// ```
///
/// Terms whose structural coefficient vanishes are skipped before their
/// power factor is evaluated, so e.g. the n = 2 case never asks for u^(-1).
pub fn flux_divergence_point(
    u: f64,
    ux: f64,
    uxx: f64,
    uxxx: f64,
    p: &KmnParams,
) -> Result<f64, ModelError> {
    let KmnParams { m, n, kappa, delta } = *p;
    let mut total = 0.0;
    if kappa != 0.0 && m != 0.0 {
        total += kappa * m * power_factor(u, m - 1.0)? * ux;
    }
    if delta != 0.0 {
        let mut disp = 0.0;
        let c3 = n * (n - 1.0) * (n - 2.0);
        if c3 != 0.0 {
            disp += c3 * power_factor(u, n - 3.0)? * ux * ux * ux;
        }
        let c2 = 3.0 * n * (n - 1.0);
        if c2 != 0.0 {
            disp += c2 * power_factor(u, n - 2.0)? * ux * uxx;
        }
        disp += n * power_factor(u, n - 1.0)? * uxxx;
        total += delta * disp;
    }
    Ok(total)
}

/// Discrete periodic spatial derivatives; implemented by the stencil
/// operators in [`crate::solver`].
pub trait SpatialDerivs {
    fn d1(&self, w: &[f64], dx: f64) -> Vec<f64>;
    fn d2(&self, w: &[f64], dx: f64) -> Vec<f64>;
    fn d3(&self, w: &[f64], dx: f64) -> Vec<f64>;
}

/// Semi-discrete right-hand side u_t = -(flux divergence), with the chain
/// rule applied analytically and only the derivatives of `u` taken
/// discretely. The stepper's default route differentiates `u^m` and `u^n`
/// directly instead; keeping both lets them be compared.
pub fn pde_rhs(
    grid: &Grid1D,
    u: &[f64],
    p: &KmnParams,
    deriv: &dyn SpatialDerivs,
) -> Result<Field, ModelError> {
    if u.len() != grid.len() {
        return Err(ModelError::FieldMismatch {
            field: u.len(),
            grid: grid.len(),
        });
    }
    let dx = grid.dx();
    let ux = deriv.d1(u, dx);
    let uxx = deriv.d2(u, dx);
    let uxxx = deriv.d3(u, dx);
    (0..u.len())
        .map(|i| flux_divergence_point(u[i], ux[i], uxx[i], uxxx[i], p).map(|f| -f))
        .collect()
}

/// Grid sums of the standard diagnostics (periodic rectangle rule, which is
/// spectrally accurate for smooth periodic data).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedQuantities {
    /// Integral of u.
    pub mass: f64,
    /// Integral of u^2.
    pub l2: f64,
    /// Integral of kappa u^(m+1)/(m+1) - delta u_x^2 / 2; only defined for
    /// n = 1, `None` otherwise.
    pub energy: Option<f64>,
}

fn periodic_d1_o4(u: &[f64], dx: f64) -> Vec<f64> {
    let w = fd::padded_periodic(u, 2);
    (0..u.len()).map(|i| fd::d1_o4(&w, i + 2, dx)).collect()
}

pub fn conserved_quantities(
    grid: &Grid1D,
    u: &[f64],
    p: &KmnParams,
) -> Result<ConservedQuantities, ModelError> {
    if u.len() != grid.len() {
        return Err(ModelError::FieldMismatch {
            field: u.len(),
            grid: grid.len(),
        });
    }
    let dx = grid.dx();
    let mass = u.iter().sum::<f64>() * dx;
    let l2 = u.iter().map(|v| v * v).sum::<f64>() * dx;
    let energy = if p.n == 1.0 {
        Some(energy(grid, u, p)?)
    } else {
        None
    };
    Ok(ConservedQuantities { mass, l2, energy })
}

/// Integral of kappa u^(m+1)/(m+1) - delta u_x^2 / 2 (n = 1 only; for
/// other n this functional is not time-invariant and the call errors).
pub fn energy(grid: &Grid1D, u: &[f64], p: &KmnParams) -> Result<f64, ModelError> {
    if p.n != 1.0 {
        return Err(ModelError::UnsupportedLaw {
            law: "energy",
            n: p.n,
        });
    }
    if u.len() != grid.len() {
        return Err(ModelError::FieldMismatch {
            field: u.len(),
            grid: grid.len(),
        });
    }
    let dx = grid.dx();
    let ux = periodic_d1_o4(u, dx);
    let mut acc = 0.0;
    for (&v, &vx) in u.iter().zip(&ux) {
        acc += p.kappa * power_factor(v, p.m + 1.0)? / (p.m + 1.0) - p.delta * vx * vx / 2.0;
    }
    Ok(acc * dx)
}

/// Local conservation laws d_t(density) + d_x(flux) = 0 along solutions.
/// Mass holds for every (m, n); the quadratic and energy laws are
/// implemented for n = 1, where they were derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConservationLaw {
    Mass,
    Quadratic,
    Energy,
}

impl ConservationLaw {
    fn name(&self) -> &'static str {
        match self {
            ConservationLaw::Mass => "mass",
            ConservationLaw::Quadratic => "quadratic",
            ConservationLaw::Energy => "energy",
        }
    }

    fn require_n1(&self, p: &KmnParams) -> Result<(), ModelError> {
        if *self != ConservationLaw::Mass && p.n != 1.0 {
            return Err(ModelError::UnsupportedLaw {
                law: self.name(),
                n: p.n,
            });
        }
        Ok(())
    }

    /// Conserved density at a point.
    pub fn density(&self, u: f64, ux: f64, p: &KmnParams) -> Result<f64, ModelError> {
        self.require_n1(p)?;
        match self {
            ConservationLaw::Mass => Ok(u),
            ConservationLaw::Quadratic => Ok(u * u),
            ConservationLaw::Energy => Ok(p.kappa * power_factor(u, p.m + 1.0)? / (p.m + 1.0)
                - p.delta * ux * ux / 2.0),
        }
    }

    /// Associated flux at a point, from the derivative jet.
    pub fn flux(
        &self,
        u: f64,
        ux: f64,
        uxx: f64,
        uxxx: f64,
        p: &KmnParams,
    ) -> Result<f64, ModelError> {
        self.require_n1(p)?;
        let KmnParams { m, n, kappa, delta } = *p;
        match self {
            ConservationLaw::Mass => {
                // kappa u^m + delta (u^n)_xx, the second factor expanded.
                let mut flux = 0.0;
                if kappa != 0.0 {
                    flux += kappa * power_factor(u, m)?;
                }
                if delta != 0.0 {
                    let mut d = 0.0;
                    let c2 = n * (n - 1.0);
                    if c2 != 0.0 {
                        d += c2 * power_factor(u, n - 2.0)? * ux * ux;
                    }
                    d += n * power_factor(u, n - 1.0)? * uxx;
                    flux += delta * d;
                }
                Ok(flux)
            }
            ConservationLaw::Quadratic => Ok(kappa * (2.0 * m / (m + 1.0))
                * power_factor(u, m + 1.0)?
                + delta * (2.0 * u * uxx - ux * ux)),
            ConservationLaw::Energy => {
                let um = power_factor(u, m)?;
                let mut flux = kappa * kappa * 0.5 * power_factor(u, 2.0 * m)?;
                let mut cross = um * uxx;
                if m != 0.0 {
                    cross -= m * power_factor(u, m - 1.0)? * ux * ux;
                }
                flux += kappa * delta * cross;
                flux += delta * delta * (0.5 * uxx * uxx - ux * uxxx);
                Ok(flux)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spow_integer_cases_are_exact() {
        assert_eq!(spow(2.0, 3.0).unwrap(), 8.0);
        assert_eq!(spow(-2.0, 3.0).unwrap(), -8.0);
        assert_eq!(spow(3.0, 0.0).unwrap(), 1.0);
        assert_eq!(spow(2.0, -2.0).unwrap(), 0.25);
    }

    #[test]
    fn spow_signed_fractional_branch() {
        assert!((spow(-4.0, 0.5).unwrap() + 2.0).abs() < 1e-15);
        assert_eq!(spow(0.0, 2.5).unwrap(), 0.0);
        assert!((spow(8.0, 1.0 / 3.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spow_rejects_zero_to_non_positive() {
        assert!(matches!(
            spow(0.0, 0.0),
            Err(ModelError::ZeroToNonPositivePower { .. })
        ));
        assert!(matches!(
            spow(0.0, -1.5),
            Err(ModelError::ZeroToNonPositivePower { .. })
        ));
    }

    #[test]
    fn power_factor_conventions() {
        // Exponent zero short-circuits to one even at u = 0.
        assert_eq!(power_factor(0.0, 0.0).unwrap(), 1.0);
        // Negative exponent near zero is reported as a singular node.
        assert!(matches!(
            power_factor(1e-13, -1.0),
            Err(ModelError::SingularNode { .. })
        ));
        assert!((power_factor(0.5, -1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn spow_is_odd_in_u(u in 0.01f64..50.0, p in 0.1f64..5.0) {
            let plus = spow(u, p).unwrap();
            let minus = spow(-u, p).unwrap();
            prop_assert!((plus + minus).abs() <= 1e-12 * plus.abs().max(1.0));
            prop_assert!((plus - u.powf(p)).abs() <= 1e-12 * plus.abs().max(1.0));
        }
    }

    /// Test double for [`SpatialDerivs`] returning preset exact derivatives.
    struct Preset {
        ux: Vec<f64>,
        uxx: Vec<f64>,
        uxxx: Vec<f64>,
    }

    impl SpatialDerivs for Preset {
        fn d1(&self, _w: &[f64], _dx: f64) -> Vec<f64> {
            self.ux.clone()
        }
        fn d2(&self, _w: &[f64], _dx: f64) -> Vec<f64> {
            self.uxx.clone()
        }
        fn d3(&self, _w: &[f64], _dx: f64) -> Vec<f64> {
            self.uxxx.clone()
        }
    }

    #[test]
    fn rhs_of_constant_field_vanishes() {
        let grid = Grid1D::new(0.0, 10.0, 16).unwrap();
        let u = vec![0.7; 16];
        let p = KmnParams::new(2.0, 3.0).unwrap();
        let zeros = Preset {
            ux: vec![0.0; 16],
            uxx: vec![0.0; 16],
            uxxx: vec![0.0; 16],
        };
        let rhs = pde_rhs(&grid, &u, &p, &zeros).unwrap();
        assert!(rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_ramp_advects_at_unit_rate() {
        // m = n = 1 with u = x: u_t = -(u_x + u_xxx) = -1 at every node.
        let grid = Grid1D::new(0.0, 8.0, 8).unwrap();
        let u: Vec<f64> = grid.coords();
        let p = KmnParams::new(1.0, 1.0).unwrap();
        let exact = Preset {
            ux: vec![1.0; 8],
            uxx: vec![0.0; 8],
            uxxx: vec![0.0; 8],
        };
        let rhs = pde_rhs(&grid, &u, &p, &exact).unwrap();
        assert!(rhs.iter().all(|&v| (v + 1.0).abs() < 1e-15));
    }

    #[test]
    fn flux_divergence_is_odd_for_cubic_cubic_case() {
        // With m = n = 3 every power is odd, so negating the jet negates
        // the flux divergence.
        let p = KmnParams::new(3.0, 3.0).unwrap();
        let (u, ux, uxx, uxxx) = (0.8, -0.3, 0.45, 0.21);
        let a = flux_divergence_point(u, ux, uxx, uxxx, &p).unwrap();
        let b = flux_divergence_point(-u, -ux, -uxx, -uxxx, &p).unwrap();
        assert!((a + b).abs() < 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn quadratic_dispersion_survives_zero_state() {
        // n = 2 must not evaluate u^(n-3) = 1/u at a node where u = 0.
        let p = KmnParams::new(2.0, 2.0).unwrap();
        let v = flux_divergence_point(0.0, 0.0, 0.5, 1.25, &p).unwrap();
        // Only 3n(n-1) u^0 ux uxx (= 0 here) and n u^1 uxxx (= 0) survive.
        assert_eq!(v, 0.0);
    }

    #[test]
    fn conserved_sums_on_uniform_state() {
        let grid = Grid1D::new(-5.0, 10.0, 64).unwrap();
        let u = vec![1.0; 64];
        let p = KmnParams::new(2.0, 1.0).unwrap();
        let q = conserved_quantities(&grid, &u, &p).unwrap();
        assert!((q.mass - 10.0).abs() < 1e-12);
        assert!((q.l2 - 10.0).abs() < 1e-12);
        assert!((q.energy.unwrap() - 10.0 / 3.0).abs() < 1e-12);

        let zero = vec![0.0; 64];
        let q0 = conserved_quantities(&grid, &zero, &p).unwrap();
        assert_eq!(q0.mass, 0.0);
        assert_eq!(q0.l2, 0.0);
        assert_eq!(q0.energy.unwrap(), 0.0);
    }

    #[test]
    fn sine_wave_diagnostics() {
        let grid = Grid1D::new(0.0, 2.0 * std::f64::consts::PI, 128).unwrap();
        let u = grid.sample(f64::sin);
        let p = KmnParams::new(2.0, 2.0).unwrap();
        let q = conserved_quantities(&grid, &u, &p).unwrap();
        assert!(q.mass.abs() < 1e-13);
        assert!((q.l2 - std::f64::consts::PI).abs() < 1e-12);
        assert!(q.energy.is_none());
        assert!(matches!(
            energy(&grid, &u, &p),
            Err(ModelError::UnsupportedLaw { .. })
        ));
    }

    #[test]
    fn non_mass_laws_require_first_order_dispersion() {
        let p = KmnParams::new(2.0, 2.0).unwrap();
        assert!(matches!(
            ConservationLaw::Quadratic.density(1.0, 0.0, &p),
            Err(ModelError::UnsupportedLaw { .. })
        ));
        assert!(matches!(
            ConservationLaw::Energy.flux(1.0, 0.0, 0.0, 0.0, &p),
            Err(ModelError::UnsupportedLaw { .. })
        ));
        // Mass works for any n.
        assert!(ConservationLaw::Mass.flux(1.0, 0.5, 0.25, 0.0, &p).is_ok());
    }

    #[test]
    fn mass_flux_matches_hand_value() {
        // kappa u^2 + delta (2 u_x^2 + 2 u u_xx) at (u, ux, uxx) = (2, 3, 5)
        // for (m, n) = (2, 2): 4 + (18 + 20) = 42.
        let p = KmnParams::new(2.0, 2.0).unwrap();
        let f = ConservationLaw::Mass.flux(2.0, 3.0, 5.0, 7.0, &p).unwrap();
        assert!((f - 42.0).abs() < 1e-13);
    }

    #[test]
    fn params_and_grid_validation() {
        assert!(matches!(
            KmnParams::new(-1.0, 2.0),
            Err(ModelError::InvalidExponents { .. })
        ));
        assert!(matches!(
            KmnParams::new(2.0, 0.5),
            Err(ModelError::InvalidExponents { .. })
        ));
        assert!(matches!(
            KmnParams::with_coefficients(2.0, 2.0, f64::NAN, 1.0),
            Err(ModelError::InvalidCoefficients { .. })
        ));
        assert!(matches!(
            Grid1D::new(0.0, 1.0, 4),
            Err(ModelError::GridTooSmall(4))
        ));
        assert!(matches!(
            Grid1D::new(0.0, -1.0, 32),
            Err(ModelError::BadLength(_))
        ));
        let g = Grid1D::new(0.0, 2.0, 8).unwrap();
        assert!((g.dx() - 0.25).abs() < 1e-15);
        assert_eq!(g.coords().len(), 8);
    }
}
