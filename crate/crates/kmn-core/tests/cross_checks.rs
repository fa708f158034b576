//! Independent cross-checks that tie different modules together: closed-form
//! values against grid diagnostics, quadrature inversion against a
//! phase-plane integration, the lift against its scaling group, and the
//! characteristics solver against the exactness of constant transport for
//! cubic convection.

use std::f64::consts::PI;

use kmn_core::constraints::{
    characteristics_solve, first_integral_orbit, reciprocal_pair_check, transport_speed, SpaceTime,
};
use kmn_core::fd;
use kmn_core::model::{conserved_quantities, ConservationLaw, Grid1D, KmnParams};
use kmn_core::ode::{self, OdeOptions};
use kmn_core::solutions::{AnalyticSolution, ClosedForm, SolitonN1, TravelingWaveParams};
use kmn_core::solver::{rhs_assembly_gap, CentralDiff, DerivOrder};
use kmn_core::symmetry::{lift_point, similarity_reduce};
use kmn_core::waves::{invert_quadrature, Branch, FirstIntegral};

fn tw(k: f64, omega: f64) -> TravelingWaveParams {
    TravelingWaveParams::new(k, omega).unwrap()
}

#[test]
fn conservation_law_divergences_vanish_along_a_pulse() {
    // For a solution of the n = 1 equation, d_t(density) + d_x(flux) must
    // vanish pointwise for each implemented law; differentiate the analytic
    // jet with high-order stencils.
    let p = KmnParams::new(2.5, 1.0).unwrap();
    let pulse = SolitonN1::new(2.5, tw(1.0, 1.2)).unwrap();
    let laws = [
        ConservationLaw::Mass,
        ConservationLaw::Quadratic,
        ConservationLaw::Energy,
    ];
    for law in laws {
        for (x, t) in [(0.3, 0.0), (1.1, 0.4), (-0.7, -0.6), (2.0, 1.0)] {
            let ddt = fd::diff1_fn(
                |tt| {
                    let j = pulse.jet(x, tt).unwrap();
                    law.density(j.u, j.ux, &p).unwrap()
                },
                t,
                0.02,
            );
            let ddx = fd::diff1_fn(
                |xx| {
                    let j = pulse.jet(xx, t).unwrap();
                    law.flux(j.u, j.ux, j.uxx, j.uxxx, &p).unwrap()
                },
                x,
                0.02,
            );
            assert!(
                (ddt + ddx).abs() < 1e-8,
                "{law:?} at ({x}, {t}): divergence {:.3e}",
                ddt + ddx
            );
        }
    }
}

#[test]
fn compact_profile_mass_matches_the_closed_value() {
    // The (2, 2) compact profile with k = omega = 1 has mass
    // int (4/3) cos^2(z/4) dz over |z| <= 2 pi, which is 8 pi / 3.
    let grid = Grid1D::new(-4.0 * PI, 8.0 * PI, 1024).unwrap();
    let compact = ClosedForm::compacton22(tw(1.0, 1.0)).unwrap();
    let u0 = grid.sample(|x| compact.eval(x, 0.0).unwrap());
    let p = KmnParams::new(2.0, 2.0).unwrap();
    let q = conserved_quantities(&grid, &u0, &p).unwrap();
    let exact = 8.0 * PI / 3.0;
    assert!(
        (q.mass - exact).abs() < 1e-5,
        "mass {} vs {exact}",
        q.mass
    );
}

#[test]
fn rhs_assemblies_agree_at_fourth_order() {
    // The conservative and expanded assemblies differ only by truncation
    // error, so their gap on a smooth field must shrink like dx^4.
    let p = KmnParams::new(2.5, 1.5).unwrap();
    let diff = CentralDiff::new(DerivOrder::Four);
    let gap_at = |n: usize| {
        let grid = Grid1D::new(0.0, 2.0 * PI, n).unwrap();
        let u = grid.sample(|x| 2.0 + x.sin());
        rhs_assembly_gap(&grid, &u, &p, &diff).unwrap()
    };
    let coarse = gap_at(64);
    let fine = gap_at(128);
    let ratio = coarse / fine;
    assert!(
        (10.0..26.0).contains(&ratio),
        "gap ratio {ratio} (coarse {coarse:.3e}, fine {fine:.3e})"
    );
}

#[test]
fn phase_plane_integration_matches_quadrature_inversion() {
    // Independent oracle for the inversion: integrate the phase-plane form
    // g_y = +sqrt(rhs)/g^(n-1) as an ODE from the same reference value and
    // compare along the rising (2, 2) arch.
    let (k, omega) = (1.0, 1.5);
    let beta = 4.0 * omega / (3.0 * k);
    let fi = FirstIntegral::new(KmnParams::new(2.0, 2.0).unwrap(), tw(k, omega)).unwrap();
    let branch = Branch::new(0.0, beta, 0.5 * beta, 1.0).unwrap();
    let ys: Vec<f64> = (0..30).map(|i| 2.9 * i as f64 / 29.0).collect();
    let rhs = |_y: f64, s: &[f64], ds: &mut [f64]| -> Result<(), String> {
        // Clamp so that trial steps beyond the crest stay finite.
        ds[0] = fi.rhs(s[0]).max(0.0).sqrt() / s[0];
        Ok(())
    };
    let states = ode::sample_path(&rhs, 0.0, &[0.5 * beta], &ys, &OdeOptions::default()).unwrap();
    for (i, &y) in ys.iter().enumerate() {
        let g_quad = invert_quadrature(y, &fi, &branch).unwrap();
        let g_ode = states[i][0];
        assert!(
            (g_quad - g_ode).abs() < 1e-6,
            "y = {y}: quadrature {g_quad} vs ode {g_ode}"
        );
    }
}

#[test]
fn inverted_profile_slope_matches_and_flattens_at_the_crest() {
    // d g / d y of the inverted (2, 2) profile must match the closed form
    // (beta/2) cos(y/2k) / (2k), which decays to zero toward the turning
    // point at y = pi k.
    let (k, omega) = (1.0, 1.5);
    let beta = 4.0 * omega / (3.0 * k);
    let fi = FirstIntegral::new(KmnParams::new(2.0, 2.0).unwrap(), tw(k, omega)).unwrap();
    let branch = Branch::new(0.0, beta, 0.5 * beta, 1.0).unwrap();
    for y in [0.5, 1.5, 2.5, 3.05] {
        let slope = fd::diff1_fn(|s| invert_quadrature(s, &fi, &branch).unwrap(), y, 1e-3);
        let expect = 0.5 * beta * (y / (2.0 * k)).cos() / (2.0 * k);
        assert!(
            (slope - expect).abs() < 1e-6,
            "y = {y}: slope {slope} vs {expect}"
        );
    }
}

#[test]
fn lift_respects_the_scaling_group() {
    // u(2x, 8t) = 8^(-alpha) u(x, t) with alpha = 2/3 at m = 2: both sides
    // sample the same invariant coordinate, so they agree to interpolation
    // round-off.
    let profile = similarity_reduce(2.0, [0.3, -0.05, 0.02], (-2.0, 2.0), 4001).unwrap();
    let t = 1.3;
    for x in [-0.9, -0.3, 0.2, 0.8] {
        let direct = lift_point(&profile, 2.0, 8.0 * t, 2.0 * x).unwrap();
        let scaled = 0.25 * lift_point(&profile, 2.0, t, x).unwrap();
        assert!(
            (direct - scaled).abs() < 1e-12,
            "x = {x}: {direct} vs {scaled}"
        );
    }
}

#[test]
fn cubic_convection_transports_rigidly() {
    // At m = 3 the transport speed collapses to the constant K exactly, so
    // initial data from the first integral translates rigidly and the
    // reciprocal pair solves the equation.
    let (m, k_const) = (3.0, 2.0);
    for w in [0.6, 1.0, 1.8] {
        assert_eq!(transport_speed(w, m, k_const).unwrap(), k_const);
    }
    let orbit = first_integral_orbit(m, k_const, (1.0, 1.0), 12.0, 2401).unwrap();
    let table = orbit.table().unwrap();
    let w0 = |s: f64| table.eval(s).unwrap();
    let w_st = SpaceTime::from_fn(5.0, 0.01, 201, 0.0, 2e-4, 5, |x, t| {
        characteristics_solve(w0, x, t, m, k_const).unwrap()
    })
    .unwrap();
    let (res_w, res_recip, res_constraint) = reciprocal_pair_check(&w_st, m, 1.0).unwrap();
    assert!(res_w < 1e-5, "equation residual of w: {res_w:.3e}");
    assert!(res_recip < 1e-5, "equation residual of 1/w: {res_recip:.3e}");
    assert!(res_constraint < 1e-6, "constraint residual: {res_constraint:.3e}");
}
