use std::path::PathBuf;

#[allow(dead_code)]
pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

/// Two constant eigenvalues with a small quadrature: fast enough for tests.
#[allow(dead_code)]
pub const TWO_CONSTANT: &str = r#"{
  "schema": "pencil-scenario/v1",
  "name": "two-constant-small",
  "dimension": 2,
  "pencil": {
    "f": [{ "family": "constant", "value": 1.0 }, { "family": "constant", "value": 2.0 }],
    "k1": 0.0,
    "k2": 0.0
  },
  "source": {
    "kind": "special-solution",
    "solution": {
      "family": "two-constant",
      "g": { "family": "exp", "amplitude": 0.03, "rate": 1.0 },
      "h": { "family": "exp", "amplitude": 0.03, "rate": 1.0 }
    },
    "dressing": {
      "s_values": [0.0],
      "disc": { "length": 40.0, "panels": 4, "per_panel": 6, "grading": { "kind": "geometric", "first": 0.5 } }
    }
  },
  "grid": { "lower": [-2.0, -2.0], "upper": [-1.0, -1.0], "resolution": 3 },
  "lax": { "lambdas": [-0.5, 3.0], "rectangle": { "corner": [-1.6, -1.4] }, "steps": 16, "probes": 1 },
  "tolerances": { "residual": 1e-5 }
}"#;
