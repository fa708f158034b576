//! Numerical laboratory for the K(m,n) family of dispersive wave equations
//!
//! ```text
//! u_t + kappa * (u^m)_x + delta * (u^n)_xxx = 0
//! ```
//!
//! on periodic 1-D domains, with m and n allowed to be rational. The crate
//! combines a method-of-lines solver with the exact structure the family
//! carries: closed-form traveling waves (including compactly supported ones),
//! conservation laws, Lie point symmetries with exact rational bracket
//! algebra, traveling-wave quadratures, and the linearizing constraint
//! machinery that produces reciprocal and separated solutions.
//!
//! Module map:
//! - [`model`]: parameters, grids, fields, sign-preserving powers, the
//!   expanded right-hand side, conserved quantities and conservation laws.
//! - [`solver`]: central finite differences, RK4 time stepping, simulation
//!   driver with conservation monitoring.
//! - [`solutions`]: catalog of closed-form solutions with analytic
//!   derivatives and residual evaluation.
//! - [`symmetry`]: exact polynomial vector fields, Lie brackets, closure
//!   tables, exponentiated group transforms, similarity reduction and lift.
//! - [`waves`]: traveling-wave first integrals, quadrature of the orbit
//!   integral and its inversion, Jacobi elliptic functions.
//! - [`constraints`]: auxiliary linear/quasilinear constraints that factor
//!   the flow, reciprocal transformations, characteristics, separation.
//!
//! Supporting numerics (`fd`, `quad`, `ode`, `root`, `interp`) are plain
//! utility modules; everything is f64 except the symmetry algebra, which is
//! exact rational.

pub mod constraints;
pub mod fd;
pub mod interp;
pub mod model;
pub mod ode;
pub mod quad;
pub mod root;
pub mod solutions;
pub mod solver;
pub mod symmetry;
pub mod waves;
