use std::path::Path;

use pencil_core::dressing::{PotentialEntry, PotentialFamily};
use pencil_core::lax::LaxKind;
use pencil_core::special::ReductionType;
use pencil_core::{DiscretizationSpec, FrameFamily, Grid, PencilSpec, Scalar, Sign, Univariate};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCENARIO_SCHEMA: &str = "pencil-scenario/v1";

/// One batch run: a data source, the pencil it is checked against, sample
/// grid, optional Lax sweep and tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub dimension: usize,
    pub pencil: PencilSpec,
    /// Signature ε^i = ±1 of an explicit frame; all +1 when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    pub source: Source,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lax: Option<LaxSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    ExplicitFrame(FrameSource),
    Dressing(DressingSource),
    SpecialSolution(SpecialSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSource {
    pub frame: FrameFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DressingSource {
    pub potentials: Vec<PotentialEntry>,
    pub dressing: DressingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialSource {
    pub solution: SpecialSolution,
    pub dressing: DressingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DressingSpec {
    pub s_values: Vec<f64>,
    pub disc: DiscretizationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Univariate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

/// Closed-form potentials of the three normal forms, for N = 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpecialSolution {
    MeanValue {
        psi: Univariate,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    OneConstant {
        g: Univariate,
        h: Univariate,
        #[serde(default = "default_sign")]
        sign: f64,
    },
    TwoConstant {
        g: Univariate,
        h: Univariate,
    },
}

fn default_nodes() -> usize {
    64
}

fn default_sign() -> f64 {
    -1.0
}

impl SpecialSolution {
    pub fn reduction_type(&self) -> ReductionType {
        match self {
            SpecialSolution::MeanValue { .. } => ReductionType::F1,
            SpecialSolution::OneConstant { .. } => ReductionType::F2,
            SpecialSolution::TwoConstant { .. } => ReductionType::F3,
        }
    }

    /// The pair potential for a pencil of the matching type.
    pub fn potential(&self, pencil: &PencilSpec) -> Result<PotentialFamily, CliError> {
        Ok(match self {
            SpecialSolution::MeanValue { psi, nodes } => PotentialFamily::MeanValue {
                psi: psi.clone(),
                nodes: *nodes,
            },
            SpecialSolution::OneConstant { g, h, sign } => {
                let (c, f, constant_first) = match (pencil.f[0].as_constant(), pencil.f[1].as_constant()) {
                    (Some(c), None) => (c, pencil.f[1].clone(), true),
                    (None, Some(c)) => (c, pencil.f[0].clone(), false),
                    _ => {
                        return Err(CliError::input(
                            "pencil.f",
                            "one-constant solutions need exactly one constant eigenvalue function",
                        ))
                    }
                };
                PotentialFamily::ClosedFormF2 {
                    g: g.clone(),
                    h: h.clone(),
                    f,
                    c,
                    sign: *sign,
                    constant_first,
                }
            }
            SpecialSolution::TwoConstant { g, h } => PotentialFamily::ClosedFormF3 {
                g: g.clone(),
                h: h.clone(),
            },
        })
    }
}

/// Tensor box with `resolution` samples per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, CliError> {
        Grid::tensor_box(&self.lower, &self.upper, self.resolution).map_err(|e| CliError::input("grid", e.to_string()))
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaxSpec {
    /// Defaults to full-pencil for explicit frames and flat-pencil for
    /// dressed data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<LaxKind>,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub rectangle: RectangleSpec,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Random points per λ at which the zero-curvature residual is probed.
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_steps() -> usize {
    64
}

fn default_probes() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleSpec {
    /// Lower corner; the grid center when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<Vec<f64>>,
    #[serde(default)]
    pub i: usize,
    #[serde(default = "one")]
    pub j: usize,
    #[serde(default = "default_size")]
    pub size: f64,
}

fn one() -> usize {
    1
}

fn default_size() -> f64 {
    1e-2
}

impl Default for RectangleSpec {
    fn default() -> Self {
        RectangleSpec {
            corner: None,
            i: 0,
            j: 1,
            size: default_size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub residual: f64,
    pub reduction: f64,
    pub special: f64,
    pub monodromy: f64,
    pub zero_curvature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-6,
            reduction: 1e-8,
            special: 1e-8,
            monodromy: 1e-8,
            zero_curvature: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// Report file name, relative to the output directory.
    pub report: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            report: "report.json".into(),
        }
    }
}

/// Tagged enums buffer their content, which hides the path of an error
/// inside the source; this re-reads the chosen variant on its own.
fn source_error(text: &str) -> Option<CliError> {
    fn inner<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Option<CliError> {
        serde_path_to_error::deserialize::<_, T>(v).err().map(|e| {
            let path = e.path().to_string();
            CliError::input(&format!("source.{path}"), e.into_inner().to_string())
        })
    }
    let root: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut source = root.get("source")?.as_object()?.clone();
    let kind = source.remove("kind")?;
    let rest = serde_json::Value::Object(source);
    match kind.as_str()? {
        "explicit-frame" => inner::<FrameSource>(rest),
        "dressing" => inner::<DressingSource>(rest),
        "special-solution" => inner::<SpecialSource>(rest),
        _ => None,
    }
}

fn finite(path: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::input(path, format!("must be finite, got {x}")))
    }
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::input(path, format!("must be positive and finite, got {x}")))
    }
}

fn finite_scalar(path: &str, z: Scalar) -> Result<(), CliError> {
    finite(path, z.re)?;
    finite(path, z.im)
}

impl Scenario {
    /// Reads and validates a scenario file.
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(&path.display().to_string(), e.to_string()))?;
        Scenario::parse(&text)
    }

    /// Parses JSON, reporting the field path and line of the first error,
    /// then validates.
    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            if path == "source" {
                if let Some(err) = source_error(text) {
                    return err;
                }
            }
            CliError::input(if path == "." { "scenario" } else { &path }, e.into_inner().to_string())
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn signs(&self) -> Vec<Sign> {
        match &self.eps {
            Some(e) => e.iter().map(|&x| if x < 0.0 { Sign::Minus } else { Sign::Plus }).collect(),
            None => vec![Sign::Plus; self.dimension],
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(CliError::input(
                "schema",
                format!("expected \"{SCENARIO_SCHEMA}\", found \"{}\"", self.schema),
            ));
        }
        let n = self.dimension;
        if n < 2 {
            return Err(CliError::input("dimension", "must be at least 2"));
        }
        if self.pencil.dim() != n {
            return Err(CliError::input(
                "pencil.f",
                format!("has {} functions for dimension {n}", self.pencil.dim()),
            ));
        }
        finite_scalar("pencil.k1", self.pencil.k1)?;
        finite_scalar("pencil.k2", self.pencil.k2)?;
        if let Some(eps) = &self.eps {
            if eps.len() != n {
                return Err(CliError::input("eps", format!("has {} entries for dimension {n}", eps.len())));
            }
            for (k, &e) in eps.iter().enumerate() {
                Sign::from_f64(e).map_err(|err| CliError::input(&format!("eps[{k}]"), err.to_string()))?;
            }
        }
        let g = &self.grid;
        if g.lower.len() != n || g.upper.len() != n {
            return Err(CliError::input("grid", format!("bounds must have {n} entries")));
        }
        for k in 0..n {
            finite(&format!("grid.lower[{k}]"), g.lower[k])?;
            finite(&format!("grid.upper[{k}]"), g.upper[k])?;
            if g.lower[k] > g.upper[k] {
                return Err(CliError::input(&format!("grid.upper[{k}]"), "must not be below grid.lower"));
            }
        }
        if g.resolution == 0 {
            return Err(CliError::input("grid.resolution", "must be positive"));
        }
        match &self.source {
            Source::ExplicitFrame(FrameSource { frame }) => {
                if frame.dimension() != n {
                    return Err(CliError::input(
                        "source.frame",
                        format!("has dimension {} instead of {n}", frame.dimension()),
                    ));
                }
            }
            Source::Dressing(DressingSource { potentials, dressing }) => {
                for (k, p) in potentials.iter().enumerate() {
                    if p.i >= n || p.j >= n {
                        return Err(CliError::input(
                            &format!("source.potentials[{k}]"),
                            format!("index ({}, {}) out of range", p.i, p.j),
                        ));
                    }
                }
                dressing.validate()?;
            }
            Source::SpecialSolution(SpecialSource { solution, dressing }) => {
                if n != 2 {
                    return Err(CliError::input("dimension", "special solutions are pair potentials, N = 2"));
                }
                if let SpecialSolution::OneConstant { sign, .. } = solution {
                    if sign.abs() != 1.0 {
                        return Err(CliError::input("source.solution.sign", "must be +1 or -1"));
                    }
                }
                dressing.validate()?;
            }
        }
        if let Some(lax) = &self.lax {
            if lax.lambdas.is_empty() {
                return Err(CliError::input("lax.lambdas", "must not be empty"));
            }
            for (k, &l) in lax.lambdas.iter().enumerate() {
                finite(&format!("lax.lambdas[{k}]"), l)?;
            }
            let r = &lax.rectangle;
            if r.i >= n || r.j >= n || r.i == r.j {
                return Err(CliError::input("lax.rectangle", format!("directions ({}, {}) invalid", r.i, r.j)));
            }
            positive("lax.rectangle.size", r.size)?;
            if let Some(c) = &r.corner {
                if c.len() != n {
                    return Err(CliError::input("lax.rectangle.corner", format!("must have {n} entries")));
                }
                for (k, &x) in c.iter().enumerate() {
                    finite(&format!("lax.rectangle.corner[{k}]"), x)?;
                }
            }
            if lax.steps == 0 {
                return Err(CliError::input("lax.steps", "must be positive"));
            }
        }
        let t = &self.tolerances;
        positive("tolerances.residual", t.residual)?;
        positive("tolerances.reduction", t.reduction)?;
        positive("tolerances.special", t.special)?;
        positive("tolerances.monodromy", t.monodromy)?;
        positive("tolerances.zero_curvature", t.zero_curvature)?;
        if self.outputs.report.is_empty() {
            return Err(CliError::input("outputs.report", "must not be empty"));
        }
        Ok(())
    }
}

impl DressingSpec {
    fn validate(&self) -> Result<(), CliError> {
        if self.s_values.is_empty() {
            return Err(CliError::input("source.dressing.s_values", "must not be empty"));
        }
        for (k, &s) in self.s_values.iter().enumerate() {
            finite(&format!("source.dressing.s_values[{k}]"), s)?;
        }
        positive("source.dressing.disc.length", self.disc.length)?;
        positive("source.dressing.disc.trunc_tol", self.disc.trunc_tol)?;
        if self.disc.panels == 0 || self.disc.per_panel == 0 {
            return Err(CliError::input("source.dressing.disc", "panel and node counts must be positive"));
        }
        if let Some(h) = self.fd_step {
            positive("source.dressing.fd_step", h)?;
        }
        Ok(())
    }
}
