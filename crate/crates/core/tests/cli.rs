//! End-to-end tests of the `detlab` binary: exit codes, artifact layout,
//! byte-stability and the container round trip.

use std::path::Path;
use std::process::{Command, Output};

use detlab::fields::{ScalarField, TorusGrid};
use detlab::io::{FieldContainer, RunSummary};
use detlab::sym::SymMatrix;

fn detlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn counterexample_emits_five_rows_of_pi_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = detlab(&["counterexample", "--n", "2", "--k", "1..5", "--p", "2", "--out", out]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");

    let csv = read(&dir.path().join("counterexample.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,support_radius,d,d_sampled,lp_norm,div_tv"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let d: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(d, std::f64::consts::PI);
    }
    let summary = RunSummary::read(&dir.path().join("counterexample_summary.json")).unwrap();
    assert!(summary.all_passed());
    assert!(summary.config.contains_key("seed"));
}

#[test]
fn quasiconcavity_on_a_constant_field_reports_zero_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let gen = detlab(&["gen", "--family", "constant", "--n", "2", "--m", "16", "--out", out]);
    assert_eq!(gen.status.code(), Some(0));

    let field = dir.path().join("field.json");
    let result = detlab(&["quasiconcavity", "--input", field.to_str().unwrap(), "--out", out]);
    assert_eq!(result.status.code(), Some(0));
    let csv = read(&dir.path().join("quasiconcavity.csv"));
    let gap: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(gap, 0.0);
}

#[test]
fn ma_solve_recovers_the_manufactured_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    // f = det(H phi* + Id) for the smooth periodic phi*; the discrete
    // solvability constraint holds exactly for this construction.
    let grid = TorusGrid::new(2, 64).unwrap();
    let phi_star = ScalarField::from_fn(grid, |x| {
        0.01 * (std::f64::consts::TAU * x[0]).sin() * (std::f64::consts::TAU * x[1]).sin()
    })
    .unwrap();
    let hess = phi_star.hessian();
    let id = SymMatrix::identity(2).unwrap();
    let f = ScalarField::new(
        grid,
        (0..grid.node_count())
            .map(|node| hess.value_at(node).add(&id).determinant())
            .collect(),
    )
    .unwrap();
    let input = dir.path().join("f.json");
    FieldContainer::from_scalar(&f).write(&input).unwrap();

    let result = detlab(&["ma-solve", "--input", input.to_str().unwrap(), "--out", out]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");

    let summary = RunSummary::read(&dir.path().join("ma-solve_summary.json")).unwrap();
    assert!(summary.all_passed());
    let phi = FieldContainer::read(&dir.path().join("phi.json"))
        .unwrap()
        .into_scalar()
        .unwrap();
    let err = phi
        .values()
        .iter()
        .zip(phi_star.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    assert!(err <= 1e-6, "recovery error {err:.3e}");
}

#[test]
fn assertion_failure_exits_two_but_still_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let grid = TorusGrid::new(2, 32).unwrap();
    let phi_star = ScalarField::from_fn(grid, |x| {
        0.01 * (std::f64::consts::TAU * x[0]).sin() * (std::f64::consts::TAU * x[1]).sin()
    })
    .unwrap();
    let hess = phi_star.hessian();
    let id = SymMatrix::identity(2).unwrap();
    let f = ScalarField::new(
        grid,
        (0..grid.node_count())
            .map(|node| hess.value_at(node).add(&id).determinant())
            .collect(),
    )
    .unwrap();
    let input = dir.path().join("f.json");
    FieldContainer::from_scalar(&f).write(&input).unwrap();

    // An unreachable residual tolerance (but still >= machine epsilon).
    let result = detlab(&[
        "ma-solve",
        "--input",
        input.to_str().unwrap(),
        "--tol-override",
        "residual_inf=3e-16",
        "--out",
        out,
    ]);
    assert_eq!(result.status.code(), Some(2), "{result:?}");
    assert!(dir.path().join("phi.json").exists());
    let summary = RunSummary::read(&dir.path().join("ma-solve_summary.json")).unwrap();
    assert!(!summary.all_passed());
}

#[test]
fn usage_errors_exit_one_and_name_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = detlab(&["gen", "--family", "bogus", "--out", out]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("`family`"), "stderr: {stderr}");
    assert!(stderr.contains("example config stanza"), "stderr: {stderr}");

    let missing = detlab(&["functional", "--out", out]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn identical_config_and_seed_reproduce_identical_csv_bytes() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let result = detlab(&[
            "probe-usc",
            "--family",
            "oscillation",
            "--n",
            "2",
            "--m",
            "32",
            "--k",
            "1..3",
            "--seed",
            "7",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(result.status.code(), Some(0), "{result:?}");
    }
    let a = read(&dir_a.path().join("probe_usc.csv"));
    let b = read(&dir_b.path().join("probe_usc.csv"));
    assert_eq!(a, b);
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        format!("family = counterexample\nn = 2\nk = 1..2\np = 2.0\nout = {out}\n"),
    )
    .unwrap();
    // --k overrides the config's range.
    let result = detlab(&[
        "counterexample",
        "--config",
        config.to_str().unwrap(),
        "--k",
        "1..3",
    ]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let csv = read(&dir.path().join("counterexample.csv"));
    assert_eq!(csv.lines().count(), 4, "header plus three rows:\n{csv}");
}

#[test]
fn gen_field_round_trips_through_the_container() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let result = detlab(&[
        "gen",
        "--family",
        "cofactor-hessian",
        "--n",
        "2",
        "--m",
        "16",
        "--seed",
        "3",
        "--out",
        out,
    ]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let path = dir.path().join("field.json");
    let first = FieldContainer::read(&path).unwrap();
    let field = first.clone().into_matrix().unwrap();
    let rewritten = FieldContainer::from_matrix(&field);
    assert_eq!(first.values, rewritten.values);
    assert_eq!(first.to_document(), rewritten.to_document());
}
