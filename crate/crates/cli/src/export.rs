use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;
use crate::report::RunReport;

/// Tables that can be cut from a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    /// One row per grid point: coordinates and every β_ij.
    BetaField,
    /// One row per grid point: coordinates and every H_i.
    HField,
    /// Long format: one row per module, family and sample point.
    ResidualMap,
    /// One row per monodromy sample.
    MonodromyVsLambda,
}

impl ExportKind {
    pub const ALL: [ExportKind; 4] = [
        ExportKind::BetaField,
        ExportKind::HField,
        ExportKind::ResidualMap,
        ExportKind::MonodromyVsLambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExportKind::BetaField => "beta-field",
            ExportKind::HField => "h-field",
            ExportKind::ResidualMap => "residual-map",
            ExportKind::MonodromyVsLambda => "monodromy-vs-lambda",
        }
    }
}

impl FromStr for ExportKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        ExportKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = ExportKind::ALL.iter().map(|k| k.name()).collect();
            CliError::input("--what", format!("unknown table \"{s}\", expected one of {}", names.join(", ")))
        })
    }
}

fn opt(s: Option<f64>) -> String {
    s.map(|v| v.to_string()).unwrap_or_default()
}

fn coord_header(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("u{k}")).collect()
}

/// Writes the table as CSV.
pub fn export<W: Write>(report: &RunReport, kind: ExportKind, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let n = report.scenario.dimension;
    let io = |e: csv::Error| CliError::input("--out", e.to_string());
    match kind {
        ExportKind::BetaField | ExportKind::HField => {
            let mut header = vec!["s".to_string(), "point".into()];
            header.extend(coord_header(n));
            if kind == ExportKind::BetaField {
                for i in 0..n {
                    for j in (0..n).filter(|&j| j != i) {
                        header.push(format!("beta_{i}_{j}_re"));
                        header.push(format!("beta_{i}_{j}_im"));
                    }
                }
            } else {
                for i in 0..n {
                    header.push(format!("h_{i}_re"));
                    header.push(format!("h_{i}_im"));
                }
            }
            w.write_record(&header).map_err(io)?;
            for f in &report.fields {
                for (p, u) in f.points.iter().enumerate() {
                    let mut row = vec![opt(f.s), p.to_string()];
                    row.extend(u.iter().map(|x| x.to_string()));
                    if kind == ExportKind::BetaField {
                        for i in 0..n {
                            for j in (0..n).filter(|&j| j != i) {
                                let [a, b] = f.beta[p][i][j];
                                row.push(a.to_string());
                                row.push(b.to_string());
                            }
                        }
                    } else {
                        for [a, b] in &f.h[p] {
                            row.push(a.to_string());
                            row.push(b.to_string());
                        }
                    }
                    w.write_record(&row).map_err(io)?;
                }
            }
        }
        ExportKind::ResidualMap => {
            let mut header = vec!["module".to_string(), "s".into(), "family".into(), "point".into()];
            header.extend(coord_header(n));
            header.push("residual".into());
            w.write_record(&header).map_err(io)?;
            for sec in &report.sections {
                for fam in &sec.report.families {
                    for (p, r) in fam.per_point.iter().enumerate() {
                        let mut row = vec![sec.module.clone(), opt(sec.s), fam.name.clone(), p.to_string()];
                        let coords = sec.report.points.get(p).map(|c| c.0.clone()).unwrap_or_default();
                        // Pair samples of the special section have two coordinates.
                        for k in 0..n {
                            row.push(coords.get(k).map(|z| z.re.to_string()).unwrap_or_default());
                        }
                        row.push(r.to_string());
                        w.write_record(&row).map_err(io)?;
                    }
                }
            }
        }
        ExportKind::MonodromyVsLambda => {
            w.write_record(["kind", "s", "lambda_re", "lambda_im", "coarse", "fine", "extrapolated", "pass"])
                .map_err(io)?;
            for m in &report.monodromy {
                w.write_record([
                    m.kind.name().to_string(),
                    opt(m.s),
                    m.lambda[0].to_string(),
                    m.lambda[1].to_string(),
                    m.coarse.to_string(),
                    m.fine.to_string(),
                    m.extrapolated.to_string(),
                    m.pass.to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| CliError::input("--out", e.to_string()))
}

pub fn export_to_file(report: &RunReport, kind: ExportKind, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::input(&path.display().to_string(), e.to_string()))?;
    export(report, kind, std::io::BufWriter::new(file))
}
