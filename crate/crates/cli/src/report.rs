use std::path::Path;

use pencil_core::lax::LaxKind;
use pencil_core::{ResidualReport, Scalar};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::scenario::Scenario;

pub const REPORT_SCHEMA: &str = "pencil-report/v1";

/// Complex number as [re, im].
pub type Pair = [f64; 2];

pub fn pair(z: Scalar) -> Pair {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub scenario: Scenario,
    pub seed: u64,
    /// "nonsingular" or "singular" on the grid.
    pub pencil: String,
    pub sections: Vec<Section>,
    pub fields: Vec<FieldSamples>,
    pub monodromy: Vec<MonodromyRow>,
    pub probes: Vec<ProbeRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
    pub verdict: Verdict,
}

/// One residual report with the stage that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub module: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub report: ResidualReport,
}

/// β_ij and H_i at the grid points; `beta[p][i][j]`, `h[p][i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSamples {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub points: Vec<Vec<f64>>,
    pub beta: Vec<Vec<Vec<Pair>>>,
    pub h: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyRow {
    pub kind: LaxKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub lambda: Pair,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub kind: LaxKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub lambda: Pair,
    pub point: Vec<f64>,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<RunReport, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::input(&format!("report {path}"), e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<RunReport, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(&path.display().to_string(), e.to_string()))?;
        RunReport::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| CliError::input(&dir.display().to_string(), e.to_string()))?;
            }
        }
        std::fs::write(path, self.to_json() + "\n").map_err(|e| CliError::input(&path.display().to_string(), e.to_string()))
    }

    /// Human-readable summary for standard output.
    pub fn summary(&self) -> String {
        let mut s = format!("scenario {}\npencil: {}\n", self.scenario.name, self.pencil);
        for sec in &self.sections {
            match sec.s {
                Some(v) => s.push_str(&format!("[{} s={v}] ", sec.module)),
                None => s.push_str(&format!("[{}] ", sec.module)),
            }
            s.push_str(&sec.report.summary());
        }
        if !self.monodromy.is_empty() {
            s.push_str("monodromy defects (Richardson)\n");
            for m in &self.monodromy {
                s.push_str(&format!(
                    "  {:<18} λ = {:>8.3}{:+.1e}i  {:.3e}  {}\n",
                    m.kind.name(),
                    m.lambda[0],
                    m.lambda[1],
                    m.extrapolated,
                    if m.pass { "pass" } else { "FAIL" }
                ));
            }
        }
        if !self.probes.is_empty() {
            let worst = self.probes.iter().map(|p| p.residual).fold(0.0, f64::max);
            s.push_str(&format!("zero-curvature probes: {} points, max {:.3e}\n", self.probes.len(), worst));
        }
        if let Some(t) = &self.timings {
            for x in t {
                s.push_str(&format!("time {:<24} {:.2} s\n", x.stage, x.seconds));
            }
        }
        s.push_str(if self.verdict.passed { "verdict: PASS\n" } else { "verdict: FAIL\n" });
        for f in &self.verdict.failures {
            s.push_str(&format!("  failed: {f}\n"));
        }
        s
    }
}
