use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use nees_core::mahler4::{mahler4_closed, MahlerParams4};

fn nees(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nees")).args(args).env_remove("NEES_TOL").output().unwrap()
}

fn rows(out: &Output) -> Vec<Vec<f64>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('v'))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn drift_summary(out: &Output) -> f64 {
    let err = stderr(out);
    let word = err.split_whitespace().nth(1).unwrap_or_else(|| panic!("no summary in {err:?}"));
    word.parse().unwrap()
}

#[test]
fn complete_integral_at_zero() {
    let out = nees(&["eval", "K", "--m", "0"]);
    assert!(out.status.success());
    assert_eq!(rows(&out), vec![vec![FRAC_PI_2]]);
}

#[test]
#[allow(clippy::approx_constant)]
fn unit_parameters_value() {
    let out = nees(&["eval", "sng", "--m", "1", "--n", "1", "--at", "1"]);
    assert!(out.status.success());
    let r = rows(&out);
    assert_eq!(r[0][0], 1.0);
    assert!((r[0][1] - 0.7071067811865476).abs() <= 1e-16);
}

#[test]
fn grid_rows_match_library() {
    let out = nees(&["eval", "sng", "--m", "0.8", "--n", "0.1", "--from", "0", "--to", "10", "--count", "1001"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(!text.contains('\r'));
    let r = rows(&out);
    assert_eq!(r.len(), 1001);
    let p = MahlerParams4::new(0.8, 0.1).unwrap();
    assert_eq!(r[0], vec![0.0, 0.0]);
    assert_eq!(r[1000][0], 10.0);
    assert_eq!(r[1000][1], mahler4_closed(10.0, &p).unwrap().sng);
}

#[test]
fn csv_reevaluates_bit_for_bit() {
    let args = ["eval", "mahler4", "--m", "0.5", "--n", "-2", "--from", "-3", "--to", "7", "--count", "37"];
    let r = rows(&nees(&args));
    let p = MahlerParams4::new(0.5, -2.0).unwrap();
    for row in r {
        let w = mahler4_closed(row[0], &p).unwrap().as_array();
        for (a, b) in row[1..].iter().zip(w) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn domain_errors_name_the_constraint() {
    let out = nees(&["eval", "sng", "--m", "0.2", "--n", "0.3", "--at", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("n <= m"), "{}", stderr(&out));

    let out = nees(&["eval", "Sng", "--n", "0.3", "--m", "0.5", "--at", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--p"));

    assert_eq!(nees(&["eval", "nope"]).status.code(), Some(1));
}

#[test]
fn generic_figure_set_conserves_integrals() {
    let out = nees(&["solve", "--figure", "ees4-generic", "--count", "11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(drift_summary(&out) < 1e-10);
    assert_eq!(rows(&out).len(), 11);
}

#[test]
fn five_parameter_set_has_five_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("system.json");
    std::fs::write(&path, r#"{"alphas": [1, -1, -0.7, -0.4, -0.2], "ic": [0, 1, 1, 1, 1]}"#).unwrap();
    let out = nees(&["solve", path.to_str().unwrap(), "--count", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "v,omega1,omega2,omega3,omega4,omega5,drift");
    assert!(rows(&out).iter().all(|r| r.len() == 7));
}

#[test]
fn two_dimensional_system_is_circular() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nees"))
        .args(["solve", "-", "--to", "6", "--count", "13"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(br#"{"alphas": [1, -1], "ic": [0, 1]}"#).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    for r in rows(&out) {
        assert!((r[1] - r[0].sin()).abs() < 1e-11 && (r[2] - r[0].cos()).abs() < 1e-11);
    }
}

#[test]
fn blow_up_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blowup.json");
    std::fs::write(&path, r#"{"alphas": [1, 1, 1], "ic": [1, 1, 1]}"#).unwrap();
    let out = nees(&["solve", path.to_str().unwrap(), "--to", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("v = 1.0"), "{}", stderr(&out));
}

#[test]
fn drift_threshold_sets_exit_status() {
    let out = nees(&["solve", "--figure", "mahler4-m0.5-n-2", "--max-drift", "1e-20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_from_environment() {
    let run = |tol: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_nees"));
        cmd.args(["solve", "--figure", "ees4-generic", "--max-drift", "1"]).env_remove("NEES_TOL");
        if let Some(t) = tol {
            cmd.env("NEES_TOL", t);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        stderr(&out).split_whitespace().nth(4).unwrap().parse::<usize>().unwrap()
    };
    assert!(run(Some("1e-6")) < run(None));
}

#[test]
fn quick_selftest_passes() {
    let t0 = std::time::Instant::now();
    let out = nees(&["selftest", "quick"]);
    assert!(out.status.success());
    assert!(t0.elapsed().as_secs_f64() < 10.0);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["passed"], true);
}

#[test]
fn full_selftest_covers_rigid_body() {
    let out = nees(&["selftest", "full"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = json["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"rigidbody.closed-form-vs-ode"));
}

#[test]
fn corrupted_tolerance_fails() {
    let out = nees(&["selftest", "quick", "--tolerance-scale", "1e-12"]);
    assert_eq!(out.status.code(), Some(3));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["passed"], false);
}

#[test]
fn figures_resolve_for_solve() {
    let out = nees(&["figures"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    for line in text.lines() {
        let name = line.split('\t').next().unwrap();
        assert!(nees(&["solve", "--figure", name, "--count", "3"]).status.success(), "{name}");
    }
}
