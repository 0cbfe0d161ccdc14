mod common;

use pencil_cli::export::{export, ExportKind};
use pencil_cli::scenario::Scenario;
use pencil_cli::{run, CliError, RunOptions, RunReport};

fn load(name: &str) -> Scenario {
    Scenario::load(&common::scenario_dir().join(name)).unwrap()
}

fn table(report: &RunReport, kind: ExportKind) -> Vec<csv::StringRecord> {
    let mut buf = Vec::new();
    export(report, kind, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    let header = r.headers().unwrap().clone();
    let mut rows = vec![header];
    rows.extend(r.records().map(|x| x.unwrap()));
    rows
}

fn column(rows: &[csv::StringRecord], name: &str) -> Vec<f64> {
    let k = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn euclidean_constant_pencil_passes_exactly() {
    let rep = run(&load("euclidean-flat.json"), &RunOptions::default()).unwrap();
    assert!(rep.verdict.passed, "{:?}", rep.verdict.failures);
    assert_eq!(rep.pencil, "nonsingular");
    assert_eq!(rep.monodromy.len(), 4);
    assert!(rep.timings.is_none());
    let rows = table(&rep, ExportKind::ResidualMap);
    assert!(rows.len() > 100);
    assert!(column(&rows, "residual").iter().all(|&r| r == 0.0));
}

#[test]
fn sphere_is_flagged_singular_and_passes() {
    let rep = run(&load("sphere-unit.json"), &RunOptions::default()).unwrap();
    assert!(rep.verdict.passed, "{:?}", rep.verdict.failures);
    assert_eq!(rep.pencil, "singular");
    // λ = −1 sits on λ + f = 0 and is moved off the real axis.
    assert!(rep.monodromy.iter().any(|m| m.lambda[0] == -1.0 && m.lambda[1] > 0.0));
    assert!(rep.sections[1].report.family("alt-form").is_none());
}

#[test]
fn sphere_beta_column_is_cosine() {
    let rep = run(&load("sphere-unit.json"), &RunOptions::default()).unwrap();
    let rows = table(&rep, ExportKind::BetaField);
    let u0 = column(&rows, "u0");
    let beta = column(&rows, "beta_0_1_re");
    assert_eq!(u0.len(), 25);
    for (u, b) in u0.iter().zip(&beta) {
        assert!((b - u.cos()).abs() < 1e-12, "{b} vs cos {u}");
    }
    assert!(column(&rows, "beta_1_0_re").iter().all(|&b| b == 0.0));
    let h = table(&rep, ExportKind::HField);
    for (u, v) in column(&h, "u0").iter().zip(column(&h, "h_1_re")) {
        assert!((v - u.sin()).abs() < 1e-12);
    }
}

#[test]
fn tolerance_override_turns_into_failures() {
    let opts = RunOptions {
        tolerance: Some(1e-12),
        ..RunOptions::default()
    };
    let rep = run(&load("sphere-unit.json"), &opts).unwrap();
    assert!(!rep.verdict.passed);
    assert!(rep.verdict.failures.iter().any(|f| f.starts_with("lame")));
    let bad = RunOptions {
        tolerance: Some(-1.0),
        ..RunOptions::default()
    };
    assert!(matches!(run(&load("sphere-unit.json"), &bad), Err(CliError::Input { .. })));
}

#[test]
fn degenerate_frame_is_a_numerical_error() {
    let mut sc = load("sphere-unit.json");
    sc.grid.lower[0] = 0.0;
    let err = run(&sc, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn report_round_trips() {
    let rep = run(&load("sphere-unit.json"), &RunOptions::default()).unwrap();
    let back = RunReport::from_json(&rep.to_json()).unwrap();
    assert_eq!(rep, back);
}

#[test]
fn reports_are_deterministic() {
    let sc = Scenario::parse(common::TWO_CONSTANT).unwrap();
    let opts = RunOptions {
        seed: 7,
        ..RunOptions::default()
    };
    let a = run(&sc, &opts).unwrap().to_json();
    let b = run(&sc, &opts).unwrap().to_json();
    assert_eq!(a, b);
    let c = run(&sc, &RunOptions { seed: 8, ..opts }).unwrap().to_json();
    assert_ne!(a, c);
}

#[test]
fn two_constant_dressing_is_certified() {
    let sc = Scenario::parse(common::TWO_CONSTANT).unwrap();
    let rep = run(&sc, &RunOptions::default()).unwrap();
    assert!(rep.verdict.passed, "{:?}", rep.verdict.failures);
    let modules: Vec<&str> = rep.sections.iter().map(|s| s.module.as_str()).collect();
    assert_eq!(modules, ["special", "reduction", "lame"]);
    assert_eq!(rep.probes.len(), 2);
    let rows = table(&rep, ExportKind::MonodromyVsLambda);
    assert_eq!(rows.len(), 3);
    assert_eq!(column(&rows, "lambda_re"), vec![-0.5, 3.0]);
    assert!(column(&rows, "extrapolated").iter().all(|&d| d < 1e-8));
    assert!(rows[1..].iter().all(|r| &r[0] == "flat-pencil"));
}

#[test]
fn family_must_match_the_pencil() {
    let mut sc = Scenario::parse(common::TWO_CONSTANT).unwrap();
    sc.pencil.f[1] = pencil_core::Univariate::identity();
    let err = run(&sc, &RunOptions::default()).unwrap_err();
    assert!(matches!(&err, CliError::Input { field, .. } if field == "source.solution.family"), "{err}");
}

#[test]
fn mixed_signature_frame_runs() {
    let mut sc = load("sphere-unit.json");
    sc.eps = Some(vec![1.0, -1.0]);
    // du² − sin²u dv² keeps curvature +1.
    sc.lax = None;
    let rep = run(&sc, &RunOptions::default()).unwrap();
    assert!(rep.monodromy.is_empty() && rep.probes.is_empty());
    assert!(rep.sections[0].report.max() < 1e-6, "{}", rep.sections[0].report.summary());
}
