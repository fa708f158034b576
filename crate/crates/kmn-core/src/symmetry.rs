//! Lie point symmetries of the equation: exact generator catalogs per
//! exponent pair, Lie brackets and closure checking over the rationals,
//! exponentiated transforms acting on analytic solutions, and the scaling
//! reduction to a third-order profile equation together with its lift back
//! to `(x, t)`.
//!
//! Generators are polynomials in `(x, t, u)` with exact rational
//! coefficients, so bracket identities (antisymmetry, Jacobi, closure) are
//! decided without any floating-point tolerance. Transform correctness is
//! established numerically instead: a transformed solution must still zero
//! the equation's residual.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::interp::{HermiteTable, InterpError};
use crate::model::{spow, Field, Grid1D};
use crate::ode::{self, OdeError, OdeOptions};
use crate::solutions::{AnalyticSolution, Jet, SolutionsError};

/// Exact rational scalar used for generator coefficients.
pub type Rat = BigRational;

/// Convenience constructor for the exact rational `p/q`.
///
/// # Panics
/// Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("profile power became non-real at chi = {chi} (v = {v}); integration stops there")]
    SingularReduction { chi: f64, v: f64 },
    #[error("generator index {index} out of range: the family has {available} generators")]
    NoSuchGenerator { index: usize, available: usize },
    #[error("lifting a scaling profile requires t > 0, got {0}")]
    NonPositiveTime(f64),
}

/// The three base coordinates a generator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    X,
    T,
    U,
}

/// Sparse polynomial in `(x, t, u)` with exact rational coefficients.
///
/// Canonical form: zero coefficients are never stored, so two polynomials are
/// equal as maps exactly when they are equal as polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly3 {
    terms: BTreeMap<(u32, u32, u32), Rat>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn constant(c: Rat) -> Self {
        Poly3::monomial(0, 0, 0, c)
    }

    pub fn one() -> Self {
        Poly3::constant(Rat::one())
    }

    /// The coordinate itself as a degree-one polynomial.
    pub fn var(v: Var) -> Self {
        match v {
            Var::X => Poly3::monomial(1, 0, 0, Rat::one()),
            Var::T => Poly3::monomial(0, 1, 0, Rat::one()),
            Var::U => Poly3::monomial(0, 0, 1, Rat::one()),
        }
    }

    /// `c * x^px * t^pt * u^pu`.
    pub fn monomial(px: u32, pt: u32, pu: u32, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((px, pt, pu), c);
        }
        Poly3 { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `x^px t^pt u^pu` (zero if the monomial is absent).
    pub fn coeff(&self, px: u32, pt: u32, pu: u32) -> Rat {
        self.terms
            .get(&(px, pt, pu))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Iterate `((px, pt, pu), coefficient)` in monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Rat)> {
        self.terms.iter()
    }

    fn accumulate(&mut self, key: (u32, u32, u32), c: Rat) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.accumulate(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect();
        Poly3 { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Poly3::zero();
        }
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).collect();
        Poly3 { terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly3::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.accumulate((ka.0 + kb.0, ka.1 + kb.1, ka.2 + kb.2), ca * cb);
            }
        }
        out
    }

    /// Exact partial derivative with respect to one coordinate.
    pub fn partial(&self, v: Var) -> Self {
        let mut out = Poly3::zero();
        for (&(i, j, l), c) in &self.terms {
            let (e, key) = match v {
                Var::X => (i, (i.saturating_sub(1), j, l)),
                Var::T => (j, (i, j.saturating_sub(1), l)),
                Var::U => (l, (i, j, l.saturating_sub(1))),
            };
            if e > 0 {
                out.accumulate(key, c * Rat::from_integer(BigInt::from(e)));
            }
        }
        out
    }
}

impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&(i, j, l), c) in &self.terms {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    f.write_str("-")?;
                }
                first = false;
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mut mono = String::new();
            for (name, e) in [("x", i), ("t", j), ("u", l)] {
                if e == 1 {
                    mono.push_str(name);
                    mono.push(' ');
                } else if e > 1 {
                    mono.push_str(&format!("{name}^{e} "));
                }
            }
            let mono = mono.trim_end();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(mono)?;
            } else {
                write!(f, "{mag} {mono}")?;
            }
        }
        Ok(())
    }
}

/// A point-symmetry generator `xi d/dx + tau d/dt + phi d/du` with exact
/// polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    pub xi: Poly3,
    pub tau: Poly3,
    pub phi: Poly3,
}

impl PolyVectorField {
    pub fn new(xi: Poly3, tau: Poly3, phi: Poly3) -> Self {
        PolyVectorField { xi, tau, phi }
    }

    pub fn zero() -> Self {
        PolyVectorField::new(Poly3::zero(), Poly3::zero(), Poly3::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.tau.is_zero() && self.phi.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        PolyVectorField::new(
            self.xi.add(&other.xi),
            self.tau.add(&other.tau),
            self.phi.add(&other.phi),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        PolyVectorField::new(
            self.xi.sub(&other.xi),
            self.tau.sub(&other.tau),
            self.phi.sub(&other.phi),
        )
    }

    pub fn scale(&self, c: &Rat) -> Self {
        PolyVectorField::new(self.xi.scale(c), self.tau.scale(c), self.phi.scale(c))
    }

    /// Directional derivative `v(f) = xi f_x + tau f_t + phi f_u`.
    pub fn apply(&self, f: &Poly3) -> Poly3 {
        self.xi
            .mul(&f.partial(Var::X))
            .add(&self.tau.mul(&f.partial(Var::T)))
            .add(&self.phi.mul(&f.partial(Var::U)))
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (p, label) in [(&self.xi, "d/dx"), (&self.tau, "d/dt"), (&self.phi, "d/du")] {
            if !p.is_zero() {
                parts.push(format!("({p}) {label}"));
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// The translation `d/dx`.
pub fn d_dx() -> PolyVectorField {
    PolyVectorField::new(Poly3::one(), Poly3::zero(), Poly3::zero())
}

/// The translation `d/dt`.
pub fn d_dt() -> PolyVectorField {
    PolyVectorField::new(Poly3::zero(), Poly3::one(), Poly3::zero())
}

/// Lie bracket `[v, w]`, computed component-wise as `v(w^i) - w(v^i)` in
/// exact rational arithmetic.
pub fn lie_bracket(v: &PolyVectorField, w: &PolyVectorField) -> PolyVectorField {
    PolyVectorField::new(
        v.apply(&w.xi).sub(&w.apply(&v.xi)),
        v.apply(&w.tau).sub(&w.apply(&v.tau)),
        v.apply(&w.phi).sub(&w.apply(&v.phi)),
    )
}

/// Which symmetry catalog applies for a given exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryCase {
    /// `n = 1`, `m` not 0, 1 or 2: two translations plus one scaling whose
    /// action on `u` carries the exponent `-2/(m-1)`.
    PowerLaw,
    /// `n = 1`, `m = 1`: two translations plus an affine shift acting on `u`.
    Linear,
    /// `n = 1`, `m = 2`: translations, a boost mixing `x` and `u`, and a
    /// scaling.
    Galilean,
    /// `n = 1`, `m = 0`: the convection term is constant, the equation is
    /// linear, and only the pure `(x, t)` part of the scaling is listed; the
    /// catalog is marked incomplete.
    ZeroConvection,
    /// `n != 1`: only the two translations survive.
    TranslationsOnly,
}

/// A symmetry-generator catalog for one exponent pair.
#[derive(Debug, Clone)]
pub struct SymmetryFamily {
    pub case: SymmetryCase,
    pub m: Rat,
    pub n: Rat,
    pub generators: Vec<PolyVectorField>,
    /// False when the listed generators are known not to exhaust the
    /// algebra. The `m = 0, n = 1` equation is linear, so its full point
    /// symmetry algebra is infinite-dimensional; only the scaling with no
    /// `u` action is catalogued for it.
    pub complete: bool,
}

/// The generator catalog for exponents `(m, n)`.
///
/// For `n = 1` the catalog depends on `m`: a generic power law gets two
/// translations plus the scaling `x d/dx + 3t d/dt - (2/(m-1)) u d/du`;
/// `m = 1` replaces the scaling by the affine shift `(u+1) d/du`; `m = 2`
/// additionally has the boost `2t d/dx + d/du`. For `n != 1` only the two
/// translations survive, listed time-first.
pub fn table1_fields(m: &Rat, n: &Rat) -> SymmetryFamily {
    let one = Rat::one();
    if *n != one {
        return SymmetryFamily {
            case: SymmetryCase::TranslationsOnly,
            m: m.clone(),
            n: n.clone(),
            generators: vec![d_dt(), d_dx()],
            complete: true,
        };
    }
    let scaling_xt = PolyVectorField::new(
        Poly3::var(Var::X),
        Poly3::monomial(0, 1, 0, rat(3, 1)),
        Poly3::zero(),
    );
    if m.is_zero() {
        SymmetryFamily {
            case: SymmetryCase::ZeroConvection,
            m: m.clone(),
            n: n.clone(),
            generators: vec![d_dx(), d_dt(), scaling_xt],
            complete: false,
        }
    } else if *m == one {
        let affine = PolyVectorField::new(
            Poly3::zero(),
            Poly3::zero(),
            Poly3::var(Var::U).add(&Poly3::one()),
        );
        SymmetryFamily {
            case: SymmetryCase::Linear,
            m: m.clone(),
            n: n.clone(),
            generators: vec![d_dx(), d_dt(), affine],
            complete: true,
        }
    } else if *m == rat(2, 1) {
        let boost = PolyVectorField::new(
            Poly3::monomial(0, 1, 0, rat(2, 1)),
            Poly3::zero(),
            Poly3::one(),
        );
        let scaling = PolyVectorField::new(
            scaling_xt.xi.clone(),
            scaling_xt.tau.clone(),
            Poly3::monomial(0, 0, 1, rat(-2, 1)),
        );
        SymmetryFamily {
            case: SymmetryCase::Galilean,
            m: m.clone(),
            n: n.clone(),
            generators: vec![d_dx(), d_dt(), boost, scaling],
            complete: true,
        }
    } else {
        // -2/(m-1), exactly.
        let u_coeff = rat(-2, 1) / (m - &one);
        let scaling = PolyVectorField::new(
            scaling_xt.xi.clone(),
            scaling_xt.tau.clone(),
            Poly3::monomial(0, 0, 1, u_coeff),
        );
        SymmetryFamily {
            case: SymmetryCase::PowerLaw,
            m: m.clone(),
            n: n.clone(),
            generators: vec![d_dx(), d_dt(), scaling],
            complete: true,
        }
    }
}

/// Result of checking a generator set for closure under the bracket.
#[derive(Debug, Clone)]
pub enum ClosureOutcome {
    /// Every pairwise bracket lies in the span: `constants[i][j]` holds the
    /// exact expansion coefficients of `[v_i, v_j]` over the input set.
    Closed { constants: Vec<Vec<Vec<Rat>>> },
    /// `[v_i, v_j]` is not a rational linear combination of the inputs; the
    /// offending bracket is returned as a witness.
    NotClosed {
        i: usize,
        j: usize,
        bracket: PolyVectorField,
    },
}

/// Check whether a set of generators spans a Lie algebra, by expanding every
/// pairwise bracket over the set in exact rational arithmetic.
pub fn closure_check(fields: &[PolyVectorField]) -> ClosureOutcome {
    let dim = fields.len();
    let mut constants = vec![vec![vec![Rat::zero(); dim]; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let bracket = lie_bracket(&fields[i], &fields[j]);
            match express_in_span(fields, &bracket) {
                Some(coeffs) => constants[i][j] = coeffs,
                None => return ClosureOutcome::NotClosed { i, j, bracket },
            }
        }
    }
    ClosureOutcome::Closed { constants }
}

/// Solve `sum_k c_k fields[k] = target` exactly, treating each distinct
/// `(component, monomial)` pair as one linear equation. Returns `None` when
/// the system is inconsistent (the target is outside the span).
fn express_in_span(fields: &[PolyVectorField], target: &PolyVectorField) -> Option<Vec<Rat>> {
    let cols = fields.len();
    // Index every coordinate that appears anywhere.
    let mut coords: BTreeMap<(u8, (u32, u32, u32)), usize> = BTreeMap::new();
    let note = |v: &PolyVectorField, coords: &mut BTreeMap<(u8, (u32, u32, u32)), usize>| {
        for (c, poly) in [(0u8, &v.xi), (1, &v.tau), (2, &v.phi)] {
            for (k, _) in poly.terms() {
                let next = coords.len();
                coords.entry((c, *k)).or_insert(next);
            }
        }
    };
    for v in fields {
        note(v, &mut coords);
    }
    note(target, &mut coords);
    let rows = coords.len();
    if rows == 0 {
        // Everything in sight is the zero field.
        return Some(vec![Rat::zero(); cols]);
    }
    let dense = |v: &PolyVectorField| -> Vec<Rat> {
        let mut out = vec![Rat::zero(); rows];
        for (c, poly) in [(0u8, &v.xi), (1, &v.tau), (2, &v.phi)] {
            for (k, val) in poly.terms() {
                out[coords[&(c, *k)]] = val.clone();
            }
        }
        out
    };
    let columns: Vec<Vec<Rat>> = fields.iter().map(&dense).collect();
    let mut a: Vec<Vec<Rat>> = (0..rows)
        .map(|r| (0..cols).map(|c| columns[c][r].clone()).collect())
        .collect();
    let mut b = dense(target);

    // Forward elimination with exact pivots.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&rr| !a[rr][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        for rr in (r + 1)..rows {
            if !a[rr][c].is_zero() {
                let f = &a[rr][c] / &a[r][c];
                for cc in c..cols {
                    let delta = &f * &a[r][cc];
                    a[rr][cc] = &a[rr][cc] - &delta;
                }
                let delta = &f * &b[r];
                b[rr] = &b[rr] - &delta;
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == rows {
            break;
        }
    }
    // Remaining rows are identically zero on the left; any nonzero right-hand
    // side there means the target is outside the span.
    if b.iter().skip(r).any(|v| !v.is_zero()) {
        return None;
    }
    // Back substitution; free columns stay zero.
    let mut x = vec![Rat::zero(); cols];
    for &(pr, pc) in pivots.iter().rev() {
        let mut acc = b[pr].clone();
        for (cc, xc) in x.iter().enumerate().skip(pc + 1) {
            if !xc.is_zero() {
                let delta = &a[pr][cc] * xc;
                acc = &acc - &delta;
            }
        }
        x[pc] = &acc / &a[pr][pc];
    }
    Some(x)
}

/// One exponentiated generator: the catalog case it came from, which
/// generator in that catalog, and the group parameter.
#[derive(Debug, Clone, Copy)]
pub struct GroupTransform {
    case: SymmetryCase,
    m: f64,
    index: usize,
    epsilon: f64,
}

#[derive(Debug, Clone, Copy)]
enum PointMap {
    TranslateX,
    TranslateT,
    /// `u(x,t) = lambda^p f(lambda x, lambda^3 t)` with `lambda = e^{-eps}`.
    Scale { u_exponent: f64 },
    /// `u(x,t) = e^{-eps} f(x,t) + eps`.
    AffineShift,
    /// `u(x,t) = f(x - 2 eps t, t) + eps`.
    GalileanBoost,
}

impl GroupTransform {
    /// Exponentiate generator `index` of `family` with parameter `epsilon`.
    pub fn new(
        family: &SymmetryFamily,
        index: usize,
        epsilon: f64,
    ) -> Result<Self, SymmetryError> {
        if index >= family.generators.len() {
            return Err(SymmetryError::NoSuchGenerator {
                index,
                available: family.generators.len(),
            });
        }
        if !epsilon.is_finite() {
            return Err(SymmetryError::InvalidParams(format!(
                "group parameter must be finite, got {epsilon}"
            )));
        }
        let m = family.m.to_f64().ok_or_else(|| {
            SymmetryError::InvalidParams("exponent m does not fit in a float".into())
        })?;
        Ok(GroupTransform {
            case: family.case,
            m,
            index,
            epsilon,
        })
    }

    pub fn case(&self) -> SymmetryCase {
        self.case
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn point_map(&self) -> PointMap {
        match self.case {
            // Time-first generator order for the translations-only catalog.
            SymmetryCase::TranslationsOnly => {
                if self.index == 0 {
                    PointMap::TranslateT
                } else {
                    PointMap::TranslateX
                }
            }
            SymmetryCase::ZeroConvection => match self.index {
                0 => PointMap::TranslateX,
                1 => PointMap::TranslateT,
                _ => PointMap::Scale { u_exponent: 0.0 },
            },
            SymmetryCase::PowerLaw => match self.index {
                0 => PointMap::TranslateX,
                1 => PointMap::TranslateT,
                _ => PointMap::Scale {
                    u_exponent: 2.0 / (self.m - 1.0),
                },
            },
            SymmetryCase::Linear => match self.index {
                0 => PointMap::TranslateX,
                1 => PointMap::TranslateT,
                _ => PointMap::AffineShift,
            },
            SymmetryCase::Galilean => match self.index {
                0 => PointMap::TranslateX,
                1 => PointMap::TranslateT,
                2 => PointMap::GalileanBoost,
                _ => PointMap::Scale { u_exponent: 2.0 },
            },
        }
    }
}

/// A solution composed with one exponentiated symmetry map. Implements
/// [`AnalyticSolution`], so residual checks apply to it directly.
#[derive(Debug, Clone)]
pub struct Transformed<S> {
    pub inner: S,
    transform: GroupTransform,
}

impl<S> Transformed<S> {
    pub fn transform(&self) -> &GroupTransform {
        &self.transform
    }
}

/// Compose a solution with the exponentiated map of one catalog generator.
pub fn apply_transform<S: AnalyticSolution>(
    transform: GroupTransform,
    inner: S,
) -> Transformed<S> {
    Transformed { inner, transform }
}

impl<S: AnalyticSolution> AnalyticSolution for Transformed<S> {
    fn params_mn(&self) -> (f64, f64) {
        self.inner.params_mn()
    }

    fn jet(&self, x: f64, t: f64) -> Result<Jet, SolutionsError> {
        let eps = self.transform.epsilon;
        match self.transform.point_map() {
            PointMap::TranslateX => self.inner.jet(x - eps, t),
            PointMap::TranslateT => self.inner.jet(x, t - eps),
            PointMap::Scale { u_exponent } => {
                let lambda = (-eps).exp();
                let j = self.inner.jet(lambda * x, lambda.powi(3) * t)?;
                let pre = lambda.powf(u_exponent);
                Ok(Jet {
                    u: pre * j.u,
                    ux: pre * lambda * j.ux,
                    uxx: pre * lambda * lambda * j.uxx,
                    uxxx: pre * lambda.powi(3) * j.uxxx,
                    ut: pre * lambda.powi(3) * j.ut,
                })
            }
            PointMap::AffineShift => {
                let pre = (-eps).exp();
                let j = self.inner.jet(x, t)?;
                Ok(Jet {
                    u: pre * j.u + eps,
                    ux: pre * j.ux,
                    uxx: pre * j.uxx,
                    uxxx: pre * j.uxxx,
                    ut: pre * j.ut,
                })
            }
            PointMap::GalileanBoost => {
                let j = self.inner.jet(x - 2.0 * eps * t, t)?;
                Ok(Jet {
                    u: j.u + eps,
                    ux: j.ux,
                    uxx: j.uxx,
                    uxxx: j.uxxx,
                    ut: j.ut - 2.0 * eps * j.ux,
                })
            }
        }
    }
}

/// Right-hand side of the reduced profile equation, as a first-order system
/// in `(v, v', v'')`:
/// `v''' = -m v^{m-1} v' + (chi/3) v' + alpha v` with `alpha = 2/(3(m-1))`.
fn reduction_rhs(
    m: f64,
    alpha: f64,
    chi: f64,
    y: &[f64],
    dy: &mut [f64],
) -> Result<(), String> {
    let v = y[0];
    let vp = y[1];
    dy[0] = vp;
    dy[1] = y[2];
    let p = m - 1.0;
    if v < 0.0 && p.fract() != 0.0 {
        return Err(format!(
            "negative profile with non-integer power exponent at chi = {chi}"
        ));
    }
    let power = spow(v, p).map_err(|e| format!("profile power at chi = {chi}: {e}"))?;
    dy[2] = -m * power * vp + chi * vp / 3.0 + alpha * v;
    Ok(())
}

/// Densely sampled scaling-invariant profile `v(chi)` with exact slopes,
/// evaluable anywhere in its span through cubic interpolation.
#[derive(Debug, Clone)]
pub struct SimilarityProfile {
    table: HermiteTable,
}

impl SimilarityProfile {
    pub fn chi_min(&self) -> f64 {
        self.table.x_min()
    }

    pub fn chi_max(&self) -> f64 {
        self.table.x_max()
    }

    pub fn eval(&self, chi: f64) -> Result<f64, InterpError> {
        self.table.eval(chi)
    }

    pub fn table(&self) -> &HermiteTable {
        &self.table
    }
}

/// Integrate the third-order profile equation
/// `v''' + m v^{m-1} v' - (chi/3) v' - alpha v = 0`, `alpha = 2/(3(m-1))`,
/// from the state `v0 = (v, v', v'')` given at `span.0`, sampling
/// `nsamples` evenly spaced nodes across `span`. The span may run in either
/// direction.
pub fn similarity_reduce(
    m: f64,
    v0: [f64; 3],
    span: (f64, f64),
    nsamples: usize,
) -> Result<SimilarityProfile, SymmetryError> {
    if !(m.is_finite() && m != 1.0) {
        return Err(SymmetryError::InvalidParams(format!(
            "the reduction exponent alpha = 2/(3(m-1)) requires finite m != 1, got {m}"
        )));
    }
    let (chi0, chi1) = span;
    if !chi0.is_finite() || !chi1.is_finite() || chi0 == chi1 {
        return Err(SymmetryError::InvalidParams(format!(
            "need a nondegenerate finite span, got ({chi0}, {chi1})"
        )));
    }
    if nsamples < 2 {
        return Err(SymmetryError::InvalidParams(format!(
            "need at least two sample nodes, got {nsamples}"
        )));
    }
    if v0.iter().any(|v| !v.is_finite()) {
        return Err(SymmetryError::InvalidParams(format!(
            "initial state must be finite, got {v0:?}"
        )));
    }
    let alpha = 2.0 / (3.0 * (m - 1.0));
    let h = (chi1 - chi0) / (nsamples - 1) as f64;
    let xs: Vec<f64> = (0..nsamples).map(|i| chi0 + h * i as f64).collect();
    let trouble = Cell::new(None);
    let rhs = |chi: f64, y: &[f64], dy: &mut [f64]| -> Result<(), String> {
        reduction_rhs(m, alpha, chi, y, dy).map_err(|msg| {
            trouble.set(Some((chi, y[0])));
            msg
        })
    };
    let states = ode::sample_path(&rhs, chi0, &v0, &xs, &OdeOptions::default()).map_err(|e| {
        match (&e, trouble.get()) {
            (OdeError::Rhs(_), Some((chi, v))) => SymmetryError::SingularReduction { chi, v },
            _ => SymmetryError::Ode(e),
        }
    })?;
    let mut values: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let mut slopes: Vec<f64> = states.iter().map(|s| s[1]).collect();
    let x0 = if h > 0.0 { chi0 } else { chi1 };
    if h < 0.0 {
        values.reverse();
        slopes.reverse();
    }
    let table = HermiteTable::new(x0, h.abs(), values, slopes)?;
    Ok(SimilarityProfile { table })
}

/// `u(x, t) = t^{-alpha} v(t^{-1/3} x)` at one point.
pub fn lift_point(
    profile: &SimilarityProfile,
    m: f64,
    t: f64,
    x: f64,
) -> Result<f64, SymmetryError> {
    if !(m.is_finite() && m != 1.0) {
        return Err(SymmetryError::InvalidParams(format!(
            "the lift exponent alpha = 2/(3(m-1)) requires finite m != 1, got {m}"
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(SymmetryError::NonPositiveTime(t));
    }
    let alpha = 2.0 / (3.0 * (m - 1.0));
    let chi = t.powf(-1.0 / 3.0) * x;
    Ok(t.powf(-alpha) * profile.eval(chi)?)
}

/// Reconstruct `u(x, t) = t^{-alpha} v(t^{-1/3} x)` on a grid from a sampled
/// profile. Every grid point must map into the profile's span.
pub fn lift(
    profile: &SimilarityProfile,
    m: f64,
    t: f64,
    grid: &Grid1D,
) -> Result<Field, SymmetryError> {
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        out.push(lift_point(profile, m, t, grid.x(i))?);
    }
    Ok(out)
}
