mod common;

use std::path::Path;
use std::process::{Command, Output};

fn pencil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pencil")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_dir().join("euclidean-flat.json");
    let out = pencil(&["run", path(&sc), "--out", path(dir.path()), "--threads", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("verdict: PASS"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn residual_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_dir().join("sphere-unit.json");
    let out = pencil(&["run", path(&sc), "--out", path(dir.path()), "--tolerance", "1e-12"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stdout).unwrap().contains("verdict: FAIL"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&pencil(&["run", path(&missing)])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, common::TWO_CONSTANT.replace("\"resolution\": 3", "\"resolution\": \"three\"")).unwrap();
    let out = pencil(&["run", path(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("grid.resolution"));
    assert_eq!(code(&pencil(&["run"])), 2);
    assert_eq!(code(&pencil(&["frobnicate"])), 2);
}

#[test]
fn numerical_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(common::scenario_dir().join("sphere-unit.json")).unwrap();
    // The frame H₂ = sin u¹ vanishes on the lower edge.
    let sc = dir.path().join("pole.json");
    std::fs::write(&sc, text.replace("\"lower\": [0.5, -1.0]", "\"lower\": [0.0, -1.0]")).unwrap();
    let out = pencil(&["run", path(&sc), "--out", path(dir.path())]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("two.json");
    std::fs::write(&sc, common::TWO_CONSTANT).unwrap();
    let mut texts = Vec::new();
    for (k, threads) in ["1", "3"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = pencil(&["run", path(&sc), "--out", path(&out_dir), "--seed", "11", "--threads", threads]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        texts.push(std::fs::read(out_dir.join("report.json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn export_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_dir().join("sphere-unit.json");
    assert_eq!(code(&pencil(&["run", path(&sc), "--out", path(dir.path())])), 0);
    let report = dir.path().join("report.json");
    for (what, header) in [
        ("beta-field", "s,point,u0,u1,beta_0_1_re"),
        ("h-field", "s,point,u0,u1,h_0_re"),
        ("residual-map", "module,s,family,point,u0,u1,residual"),
        ("monodromy-vs-lambda", "kind,s,lambda_re,lambda_im,coarse,fine,extrapolated,pass"),
    ] {
        let csv = dir.path().join(format!("{what}.csv"));
        let out = pencil(&["export", path(&report), "--what", what, "--out", path(&csv)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with(header), "{what}: {text}");
        assert!(text.lines().count() > 1);
    }
    let csv = dir.path().join("x.csv");
    assert_eq!(code(&pencil(&["export", path(&report), "--what", "spectrum", "--out", path(&csv)])), 2);
    assert_eq!(code(&pencil(&["export", path(&csv), "--what", "h-field", "--out", path(&csv)])), 2);
}

#[test]
fn timings_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let sc = common::scenario_dir().join("euclidean-flat.json");
    let out = pencil(&["run", path(&sc), "--out", path(dir.path()), "--timings"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.contains("\"timings\""));
}
