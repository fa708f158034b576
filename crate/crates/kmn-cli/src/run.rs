//! Workflow execution and CSV emission.
//!
//! Every workflow reads only its scenario and writes deterministic CSV:
//! numbers are formatted with 17 significant digits (`{:.16e}`), rows end
//! with LF, and random sample points come from a seeded generator, so the
//! same config always produces byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use kmn_core::constraints::{
    equation_residual, characteristics_solve, first_integral_constants, first_integral_orbit,
    phi_orbit, reciprocal_constraint_residual, reciprocal_constraint_values, schrodinger_residual,
    separation_solve, third_order_constraint_residual, third_order_constraint_values,
    transport_speed, ConstraintKind, ConstraintSpec, ConstraintsError, Profile, SampledOrbit,
    SpaceTime,
};
use kmn_core::fd;
use kmn_core::model::{
    flux_divergence_point, spow, Grid1D, KmnParams, ModelError,
};
use kmn_core::solutions::{
    residual_max, validate_sn23, AnalyticSolution, ClosedForm, SolitonN1, SolutionsError,
    TravelingWaveParams,
};
use kmn_core::solver::{simulate, DerivOrder, Dt, SolverConfig, SolverError};
use kmn_core::symmetry::{
    apply_transform, closure_check, lift, rat, similarity_reduce, table1_fields, ClosureOutcome,
    GroupTransform, SymmetryError, SymmetryFamily,
};

use crate::config::{ConfigError, Scenario, Workflow};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solutions(#[from] SolutionsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Constraints(#[from] ConstraintsError),
    #[error(transparent)]
    Interp(#[from] kmn_core::interp::InterpError),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Invalid(msg.into())
}

/// Execute the scenario, writing its CSV files into `out` (created if
/// absent). Returns the paths written.
pub fn run(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out)?;
    match s.workflow {
        Workflow::Simulate => run_simulate(s, out),
        Workflow::ExactResidual => run_exact_residual(s, out),
        Workflow::SymmetryCheck => run_symmetry_check(s, out),
        Workflow::Reduce => run_reduce(s, out),
        Workflow::Travel => run_travel(s, out),
        Workflow::Constraint => run_constraint(s, out),
    }
}

// --- CSV helpers -----------------------------------------------------------

/// 17 significant digits: enough to round-trip any f64, and stable text.
fn fnum(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(
    out: &Path,
    name: &str,
    header: &str,
    rows: &[String],
) -> Result<PathBuf, RunError> {
    let path = out.join(name);
    let mut text = String::with_capacity(16 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(&path, text)?;
    Ok(path)
}

/// Format rows of a residual table: the sampled coordinate, the residual
/// there, and the suite maximum repeated in every row.
fn residual_rows(points: &[(f64, f64)], max: f64) -> Vec<String> {
    points
        .iter()
        .map(|&(x, v)| format!("{},{},{}", fnum(x), fnum(v), fnum(max)))
        .collect()
}

// --- shared scenario pieces ------------------------------------------------

fn wave_from(s: &Scenario) -> Result<TravelingWaveParams, RunError> {
    let tw = TravelingWaveParams::new(s.num("k")?, s.num("omega")?)?;
    Ok(tw.with_phase(s.num_or("a", 0.0), s.num_or("epsilon", 1.0))?)
}

/// The closed-form catalog is stated for unit coefficients.
fn require_unit_coefficients(s: &Scenario) -> Result<(), RunError> {
    if s.num_or("kappa", 1.0) != 1.0 || s.num_or("delta", 1.0) != 1.0 {
        return Err(invalid(
            "the closed-form catalog covers unit coefficients only; drop kappa/delta",
        ));
    }
    Ok(())
}

/// Map (m, n) to its catalogued closed form. (2, 2) defaults to the compact
/// profile; `shape = shifted-sine` selects the open one.
fn resolve_form(s: &Scenario) -> Result<ClosedForm, RunError> {
    require_unit_coefficients(s)?;
    let (m, n) = (s.num("m")?, s.num("n")?);
    if s.has("shape") && (m, n) != (2.0, 2.0) {
        return Err(invalid(
            "`shape` selects between the two (2, 2) profiles and needs m = n = 2",
        ));
    }
    Ok(match (m, n) {
        (2.0, 2.0) => match s.word_or("shape", "compact") {
            "compact" => ClosedForm::compacton22(wave_from(s)?)?,
            _ => ClosedForm::sine_shift22(wave_from(s)?)?,
        },
        (2.0, 3.0) => ClosedForm::parabola_cap32(wave_from(s)?)?,
        (3.0, 2.0) => validate_sn23(&wave_from(s)?)?,
        (3.0, 3.0) => ClosedForm::sine33(wave_from(s)?)?,
        (1.0, 1.0) => {
            ClosedForm::sin_squared_m1(s.num("C0")?, s.num("lambda")?, s.num_or("a", 0.0))?
        }
        (3.0, 1.0) => ClosedForm::implicit_log13(wave_from(s)?)?,
        _ => {
            return Err(invalid(format!(
                "no catalogued closed form for (m, n) = ({m}, {n}); \
                 available pairs: (1,1), (2,2), (2,3), (3,1), (3,2), (3,3)"
            )))
        }
    })
}

/// Least reachable value of `epsilon y - a` for the implicit (3, 1) kind.
fn implicit_reach_min(tw: &TravelingWaveParams) -> f64 {
    let a_c = tw.omega / (tw.k * tw.k * tw.k);
    let b_c = 1.0 / (2.0 * tw.k * tw.k);
    (2.0 * (a_c * b_c).sqrt()).ln() / a_c.sqrt()
}

/// Complete elliptic integral K(modulus) by the arithmetic-geometric mean.
fn complete_quarter_period(modulus: f64) -> f64 {
    let mut a = 1.0f64;
    let mut g = (1.0 - modulus * modulus).sqrt();
    for _ in 0..64 {
        let next = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = next;
        if (a - g).abs() < 1e-16 {
            break;
        }
    }
    std::f64::consts::PI / (2.0 * a)
}

// --- simulate --------------------------------------------------------------

fn run_simulate(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let p = KmnParams::with_coefficients(
        s.num("m")?,
        s.num("n")?,
        s.num_or("kappa", 1.0),
        s.num_or("delta", 1.0),
    )?;
    let grid = Grid1D::new(s.num("x_min")?, s.num("length")?, s.count("nx")?)?;
    let u0 = match s.word("initial")? {
        "zero" => grid.sample(|_| 0.0),
        "compacton" => {
            let form = ClosedForm::compacton22(wave_from(s)?)?;
            grid.sample(|x| form.eval(x, 0.0).expect("compact profile evaluates everywhere"))
        }
        "pulse" => {
            let pulse = SolitonN1::new(p.m, wave_from(s)?)?;
            grid.sample(|x| pulse.eval(x, 0.0).expect("pulse evaluates everywhere"))
        }
        other => return Err(invalid(format!("unhandled initial data `{other}`"))),
    };
    let dt = s.num("dt")?;
    let t_end = s.num("t_end")?;
    let frames = s.count_or("frames", 9)?;
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let record_every = if frames <= 1 { 0 } else { (steps / frames).max(1) };
    let cfg = SolverConfig { order: DerivOrder::Four, dt: Dt::Fixed(dt), record_every };
    let traj = simulate(&grid, &u0, &p, t_end, &cfg)?;

    let mut trajectory = Vec::new();
    let mut conserved = Vec::new();
    for snap in &traj.snapshots {
        for i in 0..grid.len() {
            trajectory.push(format!(
                "{},{},{}",
                fnum(snap.time),
                fnum(grid.x(i)),
                fnum(snap.state[i])
            ));
        }
        let energy = match snap.conserved.energy {
            Some(e) => fnum(e),
            None => "nan".into(),
        };
        conserved.push(format!(
            "{},{},{},{}",
            fnum(snap.time),
            fnum(snap.conserved.mass),
            fnum(snap.conserved.l2),
            energy
        ));
    }
    Ok(vec![
        write_csv(out, "trajectory.csv", "t,x,u", &trajectory)?,
        write_csv(out, "conserved.csv", "t,mass,l2,energy", &conserved)?,
    ])
}

// --- exact-residual --------------------------------------------------------

/// Seeded admissible sample points for a catalog kind: compact support is
/// sampled strictly inside, the implicit kind inside its reachable band,
/// everything else over a fixed window.
fn residual_points(form: &ClosedForm, npoints: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(npoints);
    for _ in 0..npoints {
        let t = rng.random_range(-2.0..2.0);
        let x = match form {
            ClosedForm::Compacton22 { tw } => {
                let z = 2.0 * std::f64::consts::PI * tw.k * rng.random_range(-0.98..0.98);
                ((z - tw.a) / tw.epsilon + tw.omega * t) / tw.k
            }
            ClosedForm::ImplicitLog13 { tw } => {
                let target = implicit_reach_min(tw) + rng.random_range(0.1..6.0);
                let y = (target + tw.a) / tw.epsilon;
                (y + tw.omega * t) / tw.k
            }
            _ => rng.random_range(-8.0..8.0),
        };
        pts.push((x, t));
    }
    pts
}

fn run_exact_residual(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let form = resolve_form(s)?;
    let npoints = s.count_or("points", 200)?;
    if npoints == 0 {
        return Err(invalid("points must be at least 1"));
    }
    let seed = s.count_or("seed", 0)? as u64;
    let pts = residual_points(&form, npoints, seed);
    let (m, n) = form.mn();
    let p = KmnParams::new(m, n)?;
    let max = residual_max(&form, &pts)?;
    let mut values = Vec::with_capacity(pts.len());
    for &(x, t) in &pts {
        let j = form.eval_derivs(x, t)?;
        let r = j.ut + flux_divergence_point(j.u, j.ux, j.uxx, j.uxxx, &p)?;
        values.push((x, r.abs()));
    }
    Ok(vec![write_csv(
        out,
        "residuals.csv",
        "point,value,max",
        &residual_rows(&values, max),
    )?])
}

// --- travel ----------------------------------------------------------------

/// Uniform sample coordinates across one natural window of the profile:
/// pairs of (wave coordinate, x at t = 0).
fn profile_coords(form: &ClosedForm, npoints: usize) -> Vec<(f64, f64)> {
    let pi = std::f64::consts::PI;
    let (lo, hi): (f64, f64);
    // Map from the wave coordinate back to x at t = 0.
    let to_x: Box<dyn Fn(f64) -> f64> = match form {
        ClosedForm::SineShift22 { tw } | ClosedForm::Compacton22 { tw } => {
            let (k, a, eps) = (tw.k, tw.a, tw.epsilon);
            (lo, hi) = (-2.0 * pi * k, 2.0 * pi * k);
            Box::new(move |z| (z - a) / (eps * k))
        }
        ClosedForm::ParabolaCap32 { tw } => {
            let r = (37.5 * tw.omega * tw.k).sqrt();
            let (k, a, eps) = (tw.k, tw.a, tw.epsilon);
            (lo, hi) = (-r, r);
            Box::new(move |z| (z - a) / (eps * k))
        }
        ClosedForm::Sine33 { tw } => {
            let (k, a, eps) = (tw.k, tw.a, tw.epsilon);
            (lo, hi) = (-3.0 * pi * k, 3.0 * pi * k);
            Box::new(move |z| (z - a) / (eps * k))
        }
        ClosedForm::Sn23 { tw, .. } => {
            let beta = 5.0 * tw.omega / (3.0 * tw.k);
            let rho = beta.powf(0.25) / (10.0f64.sqrt() * tw.k);
            let span = 2.0 * complete_quarter_period(0.5f64.sqrt()) / rho;
            let (k, a, eps) = (tw.k, tw.a, tw.epsilon);
            (lo, hi) = (-span, span);
            Box::new(move |z| (z - a) / (eps * k))
        }
        ClosedForm::SinSquaredM1 { c0: _, lambda, a } => {
            let nu = 0.5 * (4.0 * lambda + 1.0).sqrt();
            (lo, hi) = (-a, -a + 2.0 * pi / nu);
            Box::new(|w| w)
        }
        ClosedForm::ImplicitLog13 { tw } => {
            let t0 = implicit_reach_min(tw);
            let y0 = (t0 + 1e-3 + tw.a) / tw.epsilon;
            let y1 = (t0 + 8.0 + tw.a) / tw.epsilon;
            let (k,) = (tw.k,);
            (lo, hi) = (y0.min(y1), y0.max(y1));
            Box::new(move |y| y / k)
        }
    };
    (0..npoints)
        .map(|i| {
            let y = lo + (hi - lo) * i as f64 / (npoints - 1) as f64;
            (y, to_x(y))
        })
        .collect()
}

fn run_travel(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let form = resolve_form(s)?;
    let npoints = s.count_or("points", 401)?;
    if npoints < 2 {
        return Err(invalid("points must be at least 2"));
    }
    let mut rows = Vec::with_capacity(npoints);
    for (y, x) in profile_coords(&form, npoints) {
        let u = form.eval(x, 0.0)?;
        rows.push(format!("{},{}", fnum(y), fnum(u)));
    }
    Ok(vec![write_csv(out, "profile.csv", "y,u", &rows)?])
}

// --- symmetry-check --------------------------------------------------------

fn transform_rows<S: AnalyticSolution + Copy>(
    family: &SymmetryFamily,
    sol: S,
    pts: &[(f64, f64)],
    param: f64,
) -> Result<Vec<String>, RunError> {
    let mut rows = Vec::new();
    for idx in 0..family.generators.len() {
        for sign in [1.0, -1.0] {
            let transform = GroupTransform::new(family, idx, sign * param)?;
            let moved = apply_transform(transform, sol);
            let r = residual_max(&moved, pts)?;
            rows.push(format!("{idx},{},{}", fnum(sign * param), fnum(r)));
        }
    }
    Ok(rows)
}

fn run_symmetry_check(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let m_exact = s.rational("m")?;
    let n_exact = s.rational_or("n", rat(1, 1))?;
    let family = table1_fields(&m_exact, &n_exact);
    let dim = family.generators.len();

    let mut bracket_rows = Vec::with_capacity(dim * dim * dim);
    match closure_check(&family.generators) {
        ClosureOutcome::Closed { constants } => {
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        bracket_rows.push(format!("{i},{j},{k},{}", constants[i][j][k]));
                    }
                }
            }
        }
        ClosureOutcome::NotClosed { i, j, bracket } => {
            return Err(invalid(format!(
                "generator catalog did not close: bracket ({i}, {j}) left the span: {bracket:?}"
            )));
        }
    }

    let param = s.num_or("a", 0.3);
    let npoints = s.count_or("points", 40)?;
    let seed = s.count_or("seed", 0)? as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..npoints)
        .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0)))
        .collect();
    let m = s.num("m")?;
    let n = s.num_or("n", 1.0);
    let residual_table = if n == 1.0 && m == 1.0 {
        let sol = ClosedForm::sin_squared_m1(s.num("C0")?, s.num("lambda")?, 0.0)?;
        transform_rows(&family, sol, &pts, param)?
    } else if n == 1.0 {
        let sol = SolitonN1::new(m, TravelingWaveParams::new(s.num("k")?, s.num("omega")?)?)?;
        transform_rows(&family, sol, &pts, param)?
    } else {
        let sol = resolve_form(s)?;
        transform_rows(&family, sol, &pts, param)?
    };

    Ok(vec![
        write_csv(out, "brackets.csv", "i,j,k,coefficient", &bracket_rows)?,
        write_csv(
            out,
            "transform_residuals.csv",
            "generator,parameter,residual",
            &residual_table,
        )?,
    ])
}

// --- reduce ----------------------------------------------------------------

fn run_reduce(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let m = s.num("m")?;
    let samples = s.count("samples")?;
    if samples < 2 {
        return Err(invalid("samples must be at least 2"));
    }
    let profile = similarity_reduce(
        m,
        [s.num("v0")?, s.num("v1")?, s.num("v2")?],
        (s.num("chi_min")?, s.num("chi_max")?),
        samples,
    )?;
    let table = profile.table();
    let (lo, hi) = (table.x_min(), table.x_max());
    let mut profile_rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let chi = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        profile_rows.push(format!("{},{}", fnum(chi), fnum(profile.eval(chi)?)));
    }

    let t = s.num_or("t", 1.0);
    let grid = Grid1D::new(s.num("x_min")?, s.num("length")?, s.count("nx")?)?;
    let lifted = lift(&profile, m, t, &grid)?;
    let lifted_rows: Vec<String> = (0..grid.len())
        .map(|i| format!("{},{}", fnum(grid.x(i)), fnum(lifted[i])))
        .collect();

    Ok(vec![
        write_csv(out, "profile.csv", "chi,v", &profile_rows)?,
        write_csv(out, "lifted.csv", "x,u", &lifted_rows)?,
    ])
}

// --- constraint ------------------------------------------------------------

fn constraint_kind(word: &str) -> ConstraintKind {
    match word {
        "Schrodinger41" => ConstraintKind::Schrodinger41,
        "Reciprocal49" => ConstraintKind::Reciprocal49,
        "FirstIntegral412" => ConstraintKind::FirstIntegral412,
        "Transport414" => ConstraintKind::Transport414,
        "ReciprocalN418" => ConstraintKind::ReciprocalN418,
        "Separation420" => ConstraintKind::Separation420,
        other => unreachable!("kind words are validated at parse time, got `{other}`"),
    }
}

/// The orbit of the reciprocal first integral that several constraint
/// workflows start from.
fn orbit_from(s: &Scenario, spec: &ConstraintSpec) -> Result<SampledOrbit, RunError> {
    let w0 = s.num("w0")?;
    let sign = s.num_or("sign", 1.0);
    if sign != 1.0 && sign != -1.0 {
        return Err(invalid("sign picks the initial slope branch and must be +1 or -1"));
    }
    let length = s.num_or("length", 12.0);
    let samples = s.count_or("samples", 2401)?;
    if samples < 8 {
        return Err(invalid("samples must be at least 8"));
    }
    Ok(first_integral_orbit(spec.m, spec.k_const, (w0, sign), length, samples)?)
}

fn schrodinger_case(
    s: &Scenario,
    spec: &ConstraintSpec,
) -> Result<(Vec<(f64, f64)>, f64), RunError> {
    let c0 = s.num_or("C0", 1.0);
    if c0 < 0.0 {
        return Err(invalid("C0 is the squared slope at the zero crossing; it must be >= 0"));
    }
    let y_max = s.num_or("y_max", 6.0);
    let samples = s.count_or("samples", 1201)?;
    if samples < 8 {
        return Err(invalid("samples must be at least 8"));
    }
    let orbit = phi_orbit(spec.m, spec.lambda, c0, (0.0, c0.sqrt()), y_max, samples)?;
    let dy = y_max / (samples - 1) as f64;
    let phi = orbit.ode;
    let u_vals: Vec<f64> = phi.iter().map(|v| v * v).collect();
    let psi = Profile::new(0.0, dy, phi.clone())?;
    let u = Profile::new(0.0, dy, u_vals.clone())?;
    let max = schrodinger_residual(&psi, &u, spec.m, spec.lambda)?;
    let coeff = spec.m / (2.0 * (spec.m + 1.0));
    let mut points = Vec::with_capacity(phi.len().saturating_sub(4));
    for i in 2..phi.len() - 2 {
        let psi_xx = fd::d2_o4(&phi, i, dy);
        let upow = if spec.m == 1.0 { 1.0 } else { u_vals[i].powf(spec.m - 1.0) };
        let value = psi_xx + (coeff * upow + spec.lambda) * phi[i];
        points.push((i as f64 * dy, value));
    }
    Ok((points, max))
}

fn transport_case(
    s: &Scenario,
    spec: &ConstraintSpec,
) -> Result<(Vec<(f64, f64)>, f64), RunError> {
    let orbit = orbit_from(s, spec)?;
    let table = orbit.table()?;
    let length = s.num_or("length", 12.0);
    let x_lo = s.num_or("x_min", 0.4 * length);
    let nx = s.count_or("nx", 201)?;
    if nx < 8 {
        return Err(invalid("nx must be at least 8"));
    }
    let dx = 0.2 * length / (nx - 1) as f64;
    let dt = s.num_or("dt", 2e-4);
    let nt = 5usize;
    let (tb_lo, tb_hi) = (table.x_min(), table.x_max());
    let w0 = |x: f64| {
        if (tb_lo..=tb_hi).contains(&x) {
            table.eval(x).expect("inside the table span")
        } else {
            f64::NAN
        }
    };
    let mut values = Vec::with_capacity(nt);
    for j in 0..nt {
        let t = j as f64 * dt;
        let mut row = Vec::with_capacity(nx);
        for i in 0..nx {
            let x = x_lo + i as f64 * dx;
            row.push(characteristics_solve(w0, x, t, spec.m, spec.k_const)?);
        }
        values.push(row);
    }
    let mid = nt / 2;
    let mut points = Vec::with_capacity(nx.saturating_sub(4));
    let mut max = 0.0f64;
    for i in 2..nx - 2 {
        let w = values[mid][i];
        let wx = fd::d1_o4(&values[mid], i, dx);
        let wt = (values[mid - 2][i] - 8.0 * values[mid - 1][i] + 8.0 * values[mid + 1][i]
            - values[mid + 2][i])
            / (12.0 * dt);
        let value = transport_speed(w, spec.m, spec.k_const)? * wx + wt;
        max = max.max(value.abs());
        points.push((x_lo + i as f64 * dx, value));
    }
    Ok((points, max))
}

fn separation_case(
    s: &Scenario,
    spec: &ConstraintSpec,
) -> Result<(Vec<(f64, f64)>, f64), RunError> {
    let c = s.num_or("C", 1.0);
    let f0 = [s.num("f0")?, s.num("f1")?, s.num("f2")?];
    let x_min = s.num("x_min")?;
    let length = s.num_or("length", 6.0);
    let samples = s.count_or("samples", 1201)?;
    if samples < 8 {
        return Err(invalid("samples must be at least 8"));
    }
    let (f, g) = separation_solve(spec.n, spec.lambda, f0, (x_min, x_min + length), samples, c)?;
    let nx = s.count_or("nx", 161)?;
    if nx < 8 {
        return Err(invalid("nx must be at least 8"));
    }
    // Evaluate the product on a window strictly inside the integrated span.
    let xa = x_min + 0.1 * length;
    let dx = 0.8 * length / (nx - 1) as f64;
    let dt = s.num_or("dt", 1e-3);
    let nt = 5usize;
    let mut values = Vec::with_capacity(nt);
    for j in 0..nt {
        let gt = g.eval(j as f64 * dt)?;
        let mut row = Vec::with_capacity(nx);
        for i in 0..nx {
            row.push(f.eval(xa + i as f64 * dx)? * gt);
        }
        values.push(row);
    }
    let st = SpaceTime::new(xa, dx, 0.0, dt, values.clone())?;
    let max = equation_residual(&st, spec.n, spec.n)?;
    let mid = nt / 2;
    let power: Vec<f64> = values[mid]
        .iter()
        .map(|&u| spow(u, spec.n))
        .collect::<Result<_, _>>()?;
    let mut points = Vec::with_capacity(nx.saturating_sub(6));
    for i in 3..nx - 3 {
        let ut = (values[mid - 2][i] - 8.0 * values[mid - 1][i] + 8.0 * values[mid + 1][i]
            - values[mid + 2][i])
            / (12.0 * dt);
        let value = ut + fd::d1_o4(&power, i, dx) + fd::d3_o4(&power, i, dx);
        points.push((xa + i as f64 * dx, value));
    }
    Ok((points, max))
}

fn run_constraint(s: &Scenario, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let kind = constraint_kind(s.word("kind")?);
    let spec = ConstraintSpec::new(
        kind,
        s.num("m")?,
        s.num_or("n", 1.0),
        s.num_or("lambda", 0.0),
        s.num_or("K", 0.0),
    )?;
    let (points, max) = match spec.kind {
        ConstraintKind::Schrodinger41 => schrodinger_case(s, &spec)?,
        ConstraintKind::Reciprocal49 => {
            let orbit = orbit_from(s, &spec)?;
            let vals = reciprocal_constraint_values(&orbit.profile, spec.m)?;
            let max = reciprocal_constraint_residual(&orbit.profile, spec.m)?;
            let pts = vals
                .iter()
                .enumerate()
                .map(|(i, &v)| (orbit.profile.x(i + 2), v))
                .collect();
            (pts, max)
        }
        ConstraintKind::FirstIntegral412 => {
            let orbit = orbit_from(s, &spec)?;
            let (a, b) = first_integral_constants(spec.m)?;
            let mut pts = Vec::with_capacity(orbit.profile.values.len());
            let mut max = 0.0f64;
            for (i, (&w, &slope)) in
                orbit.profile.values.iter().zip(&orbit.slopes).enumerate()
            {
                let rhs = a * spow(w, spec.m + 1.0)?
                    + b * spow(w, 3.0 - spec.m)?
                    + spec.k_const * w * w;
                let defect = slope * slope - rhs;
                max = max.max(defect.abs());
                pts.push((orbit.profile.x(i), defect));
            }
            (pts, max)
        }
        ConstraintKind::Transport414 => transport_case(s, &spec)?,
        ConstraintKind::ReciprocalN418 => {
            let orbit = orbit_from(s, &spec)?;
            let vals = third_order_constraint_values(&orbit.profile, spec.m, spec.n)?;
            let max = third_order_constraint_residual(&orbit.profile, spec.m, spec.n)?;
            let pts = vals
                .iter()
                .enumerate()
                .map(|(i, &v)| (orbit.profile.x(i + 3), v))
                .collect();
            (pts, max)
        }
        ConstraintKind::Separation420 => separation_case(s, &spec)?,
    };
    Ok(vec![write_csv(
        out,
        "residuals.csv",
        "point,value,max",
        &residual_rows(&points, max),
    )?])
}
