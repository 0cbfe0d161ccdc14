mod common;

use pencil_cli::scenario::{Scenario, Source, SCENARIO_SCHEMA};
use pencil_cli::CliError;

fn field_of(err: CliError) -> String {
    match err {
        CliError::Input { field, .. } => field,
        other => panic!("expected an input error, got {other}"),
    }
}

fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(common::TWO_CONSTANT).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn shipped_scenarios_parse() {
    let mut count = 0;
    for entry in std::fs::read_dir(common::scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        let sc = Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(sc.schema, SCENARIO_SCHEMA);
        count += 1;
    }
    assert!(count >= 4);
}

#[test]
fn round_trips_through_json() {
    let sc = Scenario::parse(common::TWO_CONSTANT).unwrap();
    let again = Scenario::parse(&serde_json::to_string(&sc).unwrap()).unwrap();
    assert_eq!(sc, again);
    assert!(matches!(sc.source, Source::SpecialSolution(_)));
    assert_eq!(sc.lax.as_ref().unwrap().steps, 16);
    assert_eq!(sc.outputs.report, "report.json");
}

#[test]
fn unknown_field_names_its_path() {
    let text = edit(|v| v["grid"]["resolutoin"] = 3.into());
    assert_eq!(field_of(Scenario::parse(&text).unwrap_err()), "grid.resolutoin");
    let text = edit(|v| v["lax"]["rectangle"]["size"] = "wide".into());
    assert_eq!(field_of(Scenario::parse(&text).unwrap_err()), "lax.rectangle.size");
}

#[test]
fn nested_type_errors_name_their_path() {
    let text = edit(|v| v["source"]["dressing"]["disc"]["panels"] = (-1).into());
    assert_eq!(field_of(Scenario::parse(&text).unwrap_err()), "source.dressing.disc.panels");
}

#[test]
fn schema_is_checked() {
    let text = edit(|v| v["schema"] = "pencil-scenario/v0".into());
    assert_eq!(field_of(Scenario::parse(&text).unwrap_err()), "schema");
}

#[test]
fn validation_rejects_inconsistent_input() {
    type Change = Box<dyn Fn(&mut serde_json::Value)>;
    let cases: Vec<(Change, &str)> = vec![
        (Box::new(|v| v["dimension"] = 3.into()), "pencil.f"),
        (Box::new(|v| v["grid"]["upper"] = serde_json::json!([-3.0, -1.0])), "grid.upper[0]"),
        (Box::new(|v| v["grid"]["resolution"] = 0.into()), "grid.resolution"),
        (Box::new(|v| v["eps"] = serde_json::json!([1.0, 0.5])), "eps[1]"),
        (Box::new(|v| v["eps"] = serde_json::json!([1.0])), "eps"),
        (Box::new(|v| v["tolerances"]["monodromy"] = (-1.0).into()), "tolerances.monodromy"),
        (Box::new(|v| v["lax"]["lambdas"] = serde_json::json!([])), "lax.lambdas"),
        (Box::new(|v| v["lax"]["rectangle"]["j"] = 0.into()), "lax.rectangle"),
        (Box::new(|v| v["lax"]["steps"] = 0.into()), "lax.steps"),
        (Box::new(|v| v["source"]["dressing"]["s_values"] = serde_json::json!([])), "source.dressing.s_values"),
        (Box::new(|v| v["source"]["dressing"]["disc"]["length"] = 0.0.into()), "source.dressing.disc.length"),
    ];
    for (change, field) in cases {
        let text = edit(change);
        assert_eq!(field_of(Scenario::parse(&text).unwrap_err()), field);
    }
}

#[test]
fn special_solutions_need_a_pair() {
    let text = edit(|v| {
        v["dimension"] = 3.into();
        v["pencil"]["f"].as_array_mut().unwrap().push(serde_json::json!({ "family": "constant", "value": 3.0 }));
        v["grid"]["lower"] = serde_json::json!([-2.0, -2.0, -2.0]);
        v["grid"]["upper"] = serde_json::json!([-1.0, -1.0, -1.0]);
        v["lax"]["rectangle"]["corner"] = serde_json::json!([-1.6, -1.4, -1.5]);
    });
    assert_eq!(field_of(Scenario::parse(&text).unwrap_err()), "dimension");
}
