//! End-to-end checks of the `kmn-lab` binary and the workflow runner:
//! each scenario writes the promised CSV files, the numbers in them satisfy
//! the residual bounds the workflows advertise, reruns are byte-identical,
//! and malformed configs fail with messages that name the offending piece.

use std::path::{Path, PathBuf};
use std::process::Command;

use kmn_cli::config::parse_config;
use kmn_cli::run::run;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kmn-lab"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.ini");
    std::fs::write(&path, text).unwrap();
    path
}

/// Run the binary expecting success; returns the temp dir (kept alive) and
/// the output directory.
fn run_ok(workflow: &str, config_text: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), config_text);
    let out = dir.path().join("out");
    let output = bin()
        .arg(workflow)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    (dir, out)
}

/// Run the binary expecting failure; returns captured stderr.
fn run_err(workflow: &str, config_text: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), config_text);
    let out = dir.path().join("out");
    let output = bin()
        .arg(workflow)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success(), "expected a failure exit");
    String::from_utf8(output.stderr).unwrap()
}

/// Read a CSV file into its header line and rows of unparsed cells.
fn read_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn cell(rows: &[Vec<String>], i: usize, j: usize) -> f64 {
    rows[i][j].parse().unwrap()
}

/// Run a scenario through the library (no subprocess) and return the rows
/// of the single residual table it writes.
fn residual_table(config_text: &str) -> (String, Vec<Vec<String>>) {
    let dir = tempfile::tempdir().unwrap();
    let scenario = parse_config(config_text).unwrap();
    let written = run(&scenario, &dir.path().join("out")).unwrap();
    assert_eq!(written.len(), 1);
    read_rows(&written[0])
}

// --- happy paths through the binary ---------------------------------------

#[test]
fn travel_writes_the_compact_profile() {
    let (_keep, out) = run_ok("travel", "[travel]\nm = 2\nn = 2\nomega = 1\nk = 1\n");
    let (header, rows) = read_rows(&out.join("profile.csv"));
    assert_eq!(header, "y,u");
    assert_eq!(rows.len(), 401);
    let peak = (0..rows.len())
        .map(|i| cell(&rows, i, 1))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((peak - 4.0 / 3.0).abs() < 1e-12, "peak height {peak}");
    assert!(cell(&rows, 0, 1).abs() < 1e-12, "left edge not at zero");
    assert!(cell(&rows, 400, 1).abs() < 1e-12, "right edge not at zero");
}

#[test]
fn exact_residual_on_the_cubic_sine_profile_is_tiny() {
    let (_keep, out) = run_ok(
        "exact-residual",
        "[exact-residual]\nm = 3\nn = 3\nk = 1\nomega = 2/3\n",
    );
    let (header, rows) = read_rows(&out.join("residuals.csv"));
    assert_eq!(header, "point,value,max");
    assert_eq!(rows.len(), 200);
    let max = cell(&rows, 0, 2);
    assert!(max < 1e-9, "max residual {max:e}");
    for i in 0..rows.len() {
        assert!(cell(&rows, i, 1) <= max, "row above the recorded max");
        assert_eq!(rows[i][2], rows[0][2], "max column should be constant");
    }
}

#[test]
fn simulate_keeps_zero_data_at_zero() {
    let (_keep, out) = run_ok(
        "simulate",
        "[simulate]\nm = 2\nn = 2\nx_min = 0\nlength = 6.4\nnx = 64\n\
         dt = 1e-3\nt_end = 0.01\ninitial = zero\n",
    );
    let (header, rows) = read_rows(&out.join("trajectory.csv"));
    assert_eq!(header, "t,x,u");
    assert!(!rows.is_empty());
    for i in 0..rows.len() {
        assert_eq!(cell(&rows, i, 2), 0.0, "zero data moved");
    }
    let (header, rows) = read_rows(&out.join("conserved.csv"));
    assert_eq!(header, "t,mass,l2,energy");
    for i in 0..rows.len() {
        assert_eq!(cell(&rows, i, 1), 0.0);
        assert_eq!(cell(&rows, i, 2), 0.0);
        // n = 2 has no catalogued energy density; the column is a NaN marker.
        assert!(cell(&rows, i, 3).is_nan());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let text = "[exact-residual]\nm = 2\nn = 2\nk = 1\nomega = 1\npoints = 64\nseed = 7\n";
    let (_keep_a, out_a) = run_ok("exact-residual", text);
    let (_keep_b, out_b) = run_ok("exact-residual", text);
    let bytes_a = std::fs::read(out_a.join("residuals.csv")).unwrap();
    let bytes_b = std::fs::read(out_b.join("residuals.csv")).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b, "rerun changed the output bytes");
}

#[test]
fn symmetry_check_emits_the_four_generator_bracket_table() {
    let (_keep, out) = run_ok("symmetry-check", "[symmetry-check]\nm = 2\nk = 1\nomega = 1\n");

    let (header, brackets) = read_rows(&out.join("brackets.csv"));
    assert_eq!(header, "i,j,k,coefficient");
    assert_eq!(brackets.len(), 64, "expected a full 4x4x4 coefficient table");
    for row in &brackets {
        // A field brackets to zero against itself.
        if row[0] == row[1] {
            assert_eq!(row[3], "0");
        }
    }

    let (header, residuals) = read_rows(&out.join("transform_residuals.csv"));
    assert_eq!(header, "generator,parameter,residual");
    assert_eq!(residuals.len(), 8, "four generators, two parameter signs each");
    for i in 0..residuals.len() {
        let r = cell(&residuals, i, 2);
        assert!(r < 1e-7, "transformed pulse stopped solving the equation: {r:e}");
    }
}

#[test]
fn reduce_profile_and_lift_agree_where_they_overlap() {
    let (_keep, out) = run_ok(
        "reduce",
        "[reduce]\nm = 2\nv0 = 0.3\nv1 = -0.05\nv2 = 0.02\nchi_min = -2\nchi_max = 2\n\
         samples = 801\nx_min = -2\nlength = 4\nnx = 64\nt = 1\n",
    );
    let (header, profile) = read_rows(&out.join("profile.csv"));
    assert_eq!(header, "chi,v");
    assert_eq!(profile.len(), 801);
    let (header, lifted) = read_rows(&out.join("lifted.csv"));
    assert_eq!(header, "x,u");
    assert_eq!(lifted.len(), 64);
    // At t = 1 the lift is the identity, so u(0, 1) equals v(0). Row 400 of
    // the profile sits at chi = 0 and row 32 of the grid at x = 0.
    assert!(cell(&profile, 400, 0).abs() < 1e-12);
    assert!(cell(&lifted, 32, 0).abs() < 1e-12);
    let gap = (cell(&profile, 400, 1) - cell(&lifted, 32, 1)).abs();
    assert!(gap < 1e-12, "profile and lift disagree at the origin: {gap:e}");
}

#[test]
fn reciprocal_constraint_residual_is_small_on_an_orbit() {
    let (_keep, out) = run_ok(
        "constraint",
        "[constraint]\nkind = Reciprocal49\nm = 2\nK = 2\nw0 = 1\n",
    );
    let (header, rows) = read_rows(&out.join("residuals.csv"));
    assert_eq!(header, "point,value,max");
    let max = cell(&rows, 0, 2);
    assert!(max < 1e-6, "constraint residual {max:e}");
}

// --- failure modes ---------------------------------------------------------

#[test]
fn epsilon_outside_the_sign_pair_is_rejected() {
    let err = run_err(
        "exact-residual",
        "[exact-residual]\nm = 2\nn = 2\nk = 1\nomega = 1\nepsilon = 2\n",
    );
    assert!(err.starts_with("error:"), "stderr was: {err}");
    assert!(err.contains("epsilon"), "stderr was: {err}");
}

#[test]
fn missing_m_names_the_key_and_workflow() {
    let err = run_err("travel", "[travel]\nn = 2\nomega = 1\nk = 1\n");
    assert!(err.starts_with("error:"), "stderr was: {err}");
    assert!(err.contains("`m`"), "stderr was: {err}");
    assert!(err.contains("travel"), "stderr was: {err}");
}

#[test]
fn unknown_key_errors_carry_the_line_number() {
    let err = run_err("travel", "[travel]\nm = 2\nn = 2\nbogus = 1\n");
    assert!(err.contains("line 4"), "stderr was: {err}");
    assert!(err.contains("`bogus`"), "stderr was: {err}");
}

#[test]
fn workflow_argument_must_match_the_section() {
    let err = run_err("simulate", "[travel]\nm = 2\nn = 2\nomega = 1\nk = 1\n");
    assert!(err.contains("[travel]"), "stderr was: {err}");
    assert!(err.contains("simulate"), "stderr was: {err}");
}

// --- residual bounds checked through the library runner --------------------

#[test]
fn first_integral_defect_vanishes_along_the_sampled_orbit() {
    let (_, rows) = residual_table(
        "[constraint]\nkind = FirstIntegral412\nm = 2\nK = 2\nw0 = 1\n",
    );
    let max = cell(&rows, 0, 2);
    assert!(max < 1e-8, "first-integral defect {max:e}");
}

#[test]
fn transport_balance_holds_along_characteristics() {
    let (_, rows) = residual_table(
        "[constraint]\nkind = Transport414\nm = 2\nK = 2\nw0 = 1\n",
    );
    let max = cell(&rows, 0, 2);
    assert!(max < 1e-5, "transport residual {max:e}");
}

#[test]
fn static_separated_product_solves_the_linear_case() {
    // n = 1, lambda = 0, C = 1 keeps the time factor at one and the spatial
    // equation linear, so the product is a steady exact solution and only
    // finite differencing contributes.
    let (_, rows) = residual_table(
        "[constraint]\nkind = Separation420\nm = 1\nn = 1\nlambda = 0\nC = 1\n\
         f0 = 2\nf1 = 1\nf2 = 0\nx_min = 0\n",
    );
    let max = cell(&rows, 0, 2);
    assert!(max < 1e-5, "separation residual {max:e}");
}

#[test]
fn zero_crossing_orbit_satisfies_the_linearized_equation() {
    let (_, rows) = residual_table(
        "[constraint]\nkind = Schrodinger41\nm = 2\nlambda = 0.25\nC0 = 1\n",
    );
    let max = cell(&rows, 0, 2);
    assert!(max < 1e-5, "eigenfunction residual {max:e}");
}

#[test]
fn third_order_orbit_constraint_matches_the_library_aggregate() {
    let (_, rows) = residual_table(
        "[constraint]\nkind = ReciprocalN418\nm = 2\nn = 1\nK = 2\nw0 = 1\n",
    );
    let max = cell(&rows, 0, 2);
    let pointwise = (0..rows.len())
        .map(|i| cell(&rows, i, 1).abs())
        .fold(0.0f64, f64::max);
    assert!((pointwise - max).abs() <= 1e-12 * max.max(1.0));
    assert!(max < 1e-4, "third-order constraint residual {max:e}");
}
