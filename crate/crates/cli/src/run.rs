use std::sync::Arc;
use std::time::Instant;

use pencil_core::dressing::{dress, DressingConfig, Potentials};
use pencil_core::lame::residual_suite;
use pencil_core::lax::{monodromy_sweep, offset_sweep, zero_curvature_residual};
use pencil_core::metric::constant_curvature_residual;
use pencil_core::special::{
    classify_pair, general_solution_f2, general_solution_f3, mean_value_solution, residual_darboux, residual_f2,
    residual_f3,
};
use pencil_core::{re, Coordinates, FiniteDifference, Grid, LameFrame, LaxKind, Mode, Rectangle, Scalar, Stepper, SystemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::report::{pair, FieldSamples, MonodromyRow, ProbeRow, RunReport, Section, Timing, Verdict, REPORT_SCHEMA};
use crate::scenario::{DressingSource, DressingSpec, FrameSource, SpecialSource, LaxSpec, Scenario, Source, SpecialSolution};

/// Command-line overrides of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces `tolerances.residual`.
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub timings: bool,
}

/// One system instance to certify, with the dressing parameter when it
/// came from a dressing run.
struct Candidate {
    s: Option<f64>,
    data: SystemInstance,
}

struct Clock {
    on: bool,
    rows: Vec<Timing>,
    start: Instant,
}

impl Clock {
    fn new(on: bool) -> Self {
        Clock {
            on,
            rows: Vec::new(),
            start: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &str) {
        if self.on {
            self.rows.push(Timing {
                stage: stage.to_string(),
                seconds: self.start.elapsed().as_secs_f64(),
            });
        }
        self.start = Instant::now();
    }
}

pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut scenario = scenario.clone();
    if let Some(t) = opts.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::input("--tolerance", format!("must be positive and finite, got {t}")));
        }
        scenario.tolerances.residual = t;
    }
    scenario.validate()?;
    let sc = &scenario;
    let grid = sc.grid.build()?;
    let tol = sc.tolerances.clone();
    let mut clock = Clock::new(opts.timings);
    let mut sections = Vec::new();

    let candidates = match &sc.source {
        Source::ExplicitFrame(FrameSource { frame }) => {
            let built = frame.build().map_err(CliError::numerical("frame"))?;
            let frame = LameFrame::new(built.h, sc.signs()).map_err(|e| CliError::input("eps", e.to_string()))?;
            // Curvature needs second derivatives of the metric; the
            // fourth-order stencil keeps their error well under 1e-6.
            let metric = frame.to_metric().with_fd(FiniteDifference::fourth(1e-3));
            let curvature = constant_curvature_residual(&metric, sc.pencil.k2, &grid, tol.residual)
                .map_err(CliError::numerical("curvature"))?;
            sections.push(Section {
                module: "curvature".into(),
                s: None,
                report: curvature,
            });
            let data = SystemInstance::from_frame(frame, sc.pencil.clone()).map_err(CliError::numerical("lame"))?;
            let suite = residual_suite(&data, &grid, tol.residual).map_err(CliError::numerical("lame"))?;
            sections.push(Section {
                module: "lame".into(),
                s: None,
                report: suite,
            });
            clock.lap("explicit frame");
            vec![Candidate { s: None, data }]
        }
        Source::Dressing(DressingSource { potentials, dressing }) => {
            let pots = Potentials::new(sc.dimension, potentials).map_err(|e| CliError::input("source.potentials", e.to_string()))?;
            let out = dress_all(sc, Arc::new(pots), dressing, &grid, &mut sections)?;
            clock.lap("dressing");
            out
        }
        Source::SpecialSolution(SpecialSource { solution, dressing }) => {
            check_type(sc, solution, &grid)?;
            let family = solution.potential(&sc.pencil)?;
            let pots = Potentials::pair(family).map_err(|e| CliError::input("source.solution", e.to_string()))?;
            for &s in &dressing.s_values {
                if let Some(report) = normal_form(solution, &grid, s, tol.special)? {
                    sections.push(Section {
                        module: "special".into(),
                        s: Some(s),
                        report,
                    });
                }
            }
            let out = dress_all(sc, Arc::new(pots), dressing, &grid, &mut sections)?;
            clock.lap("special solution");
            out
        }
    };

    let pencil = if candidates.iter().all(|c| c.data.pencil_nonsingular(&grid)) {
        "nonsingular"
    } else {
        "singular"
    };

    let points = grid.points();
    let mut fields = Vec::new();
    for c in &candidates {
        fields.push(sample_fields(c, &points)?);
    }
    clock.lap("field samples");

    let mut monodromy = Vec::new();
    let mut probes = Vec::new();
    if let Some(spec) = &sc.lax {
        let kind = spec.kind.unwrap_or(match sc.source {
            Source::ExplicitFrame(_) => LaxKind::FullPencil,
            _ => LaxKind::FlatPencil,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for c in &candidates {
            certify(sc, spec, kind, c, &mut rng, &mut monodromy, &mut probes)?;
        }
        clock.lap("lax");
    }

    let verdict = verdict(&sections, &monodromy, &probes);
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        scenario,
        seed: opts.seed,
        pencil: pencil.into(),
        sections,
        fields,
        monodromy,
        probes,
        timings: opts.timings.then_some(clock.rows),
        verdict,
    })
}

fn dress_all(
    sc: &Scenario,
    pots: Arc<Potentials>,
    spec: &DressingSpec,
    grid: &Grid,
    sections: &mut Vec<Section>,
) -> Result<Vec<Candidate>, CliError> {
    let mut out = Vec::new();
    for &s in &spec.s_values {
        let mut config = DressingConfig::new(s, spec.disc.clone());
        if let Some(seed) = &spec.seed {
            config = config.with_seed(seed.clone());
        }
        if let Some(h) = spec.fd_step {
            config.fd_step = h;
        }
        let run = dress(
            pots.clone(),
            sc.pencil.clone(),
            config,
            grid,
            sc.tolerances.residual,
            sc.tolerances.reduction,
        )
        .map_err(CliError::numerical("dressing"))?;
        sections.push(Section {
            module: "reduction".into(),
            s: Some(s),
            report: run.reduction,
        });
        sections.push(Section {
            module: "lame".into(),
            s: Some(s),
            report: run.report,
        });
        out.push(Candidate {
            s: Some(s),
            data: run.instance,
        });
    }
    Ok(out)
}

fn axis_samples(grid: &Grid) -> Vec<Scalar> {
    let mut xs: Vec<f64> = grid.points().iter().flat_map(|p| p.0.iter().map(|z| z.re).collect::<Vec<_>>()).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter().map(re).collect()
}

/// The pencil must have the normal form the solution family is written in.
fn check_type(sc: &Scenario, solution: &SpecialSolution, grid: &Grid) -> Result<(), CliError> {
    let found = classify_pair(&sc.pencil.f[0], &sc.pencil.f[1], &axis_samples(grid))
        .map_err(|e| CliError::input("pencil.f", e.to_string()))?;
    let wanted = solution.reduction_type();
    if found != wanted {
        return Err(CliError::input(
            "source.solution.family",
            format!("pencil has reduction type {found:?}, the family needs {wanted:?}"),
        ));
    }
    Ok(())
}

/// Residual of the family's normal form at the grid points in potential
/// variables (u¹ − s, u² − s); singular samples are skipped.
fn normal_form(
    solution: &SpecialSolution,
    grid: &Grid,
    s: f64,
    tol: f64,
) -> Result<Option<pencil_core::ResidualReport>, CliError> {
    let uv: Vec<(Scalar, Scalar)> = grid
        .points()
        .iter()
        .map(|p| (p.0[0] - s, p.0[1] - s))
        .collect();
    let report = match solution {
        SpecialSolution::MeanValue { psi, nodes } => {
            let tr: Vec<_> = uv
                .iter()
                .map(|&(a, b)| ((a + b) * 0.5, (a - b) * 0.5))
                .filter(|&(_, r)| r != re(0.0))
                .collect();
            if tr.is_empty() {
                return Ok(None);
            }
            residual_darboux(&mean_value_solution(psi.clone(), *nodes), &tr, tol)
        }
        SpecialSolution::OneConstant { g, h, .. } => {
            let ab: Vec<_> = uv.into_iter().filter(|&(_, b)| b != re(0.0)).collect();
            if ab.is_empty() {
                return Ok(None);
            }
            residual_f2(&general_solution_f2(g.clone(), h.clone(), Mode::Complex), &ab, tol)
        }
        SpecialSolution::TwoConstant { g, h } => {
            residual_f3(&general_solution_f3(g.clone(), h.clone()), &uv, tol)
        }
    };
    report.map(Some).map_err(CliError::numerical("special"))
}

fn sample_fields(c: &Candidate, points: &[Coordinates]) -> Result<FieldSamples, CliError> {
    let mut beta = Vec::with_capacity(points.len());
    let mut h = Vec::with_capacity(points.len());
    for p in points {
        let b = c.data.beta.values(p.as_slice()).map_err(CliError::numerical("fields"))?;
        beta.push(b.iter().map(|row| row.iter().map(|&z| pair(z)).collect()).collect());
        let v = c.data.frame.values(p.as_slice()).map_err(CliError::numerical("fields"))?;
        h.push(v.iter().map(|&z| pair(z)).collect());
    }
    Ok(FieldSamples {
        s: c.s,
        points: points.iter().map(|p| p.0.iter().map(|z| z.re).collect()).collect(),
        beta,
        h,
    })
}

fn certify(
    sc: &Scenario,
    spec: &LaxSpec,
    kind: LaxKind,
    c: &Candidate,
    rng: &mut ChaCha8Rng,
    monodromy: &mut Vec<MonodromyRow>,
    probes: &mut Vec<ProbeRow>,
) -> Result<(), CliError> {
    let r = &spec.rectangle;
    let corner = r.corner.clone().unwrap_or_else(|| sc.grid.center());
    let rect = Rectangle::new(Coordinates::real(&corner), r.i, r.j, r.size, r.size);
    let lambdas = offset_sweep(&spec.lambdas, &c.data, &rect.boundary(), 1e-6);
    let stepper = Stepper::new(spec.steps);
    let defects = monodromy_sweep(kind, &c.data, &rect, &lambdas, stepper).map_err(CliError::numerical("monodromy"))?;
    for d in defects {
        monodromy.push(MonodromyRow {
            kind,
            s: c.s,
            lambda: pair(d.lambda),
            coarse: d.coarse,
            fine: d.fine,
            extrapolated: d.extrapolated,
            pass: d.extrapolated <= sc.tolerances.monodromy,
        });
    }
    let (lo, hi) = (&sc.grid.lower, &sc.grid.upper);
    for &lambda in &lambdas {
        for _ in 0..spec.probes {
            let u: Vec<f64> = lo.iter().zip(hi).map(|(&a, &b)| if a < b { rng.gen_range(a..b) } else { a }).collect();
            let point = Coordinates::real(&u);
            let residual = match zero_curvature_residual(kind, &c.data, &point, lambda) {
                Ok(v) => v,
                // A random point may land on λ + f^i = 0; it carries no information.
                Err(pencil_core::Error::SingularSpectralPoint { .. }) => continue,
                Err(e) => return Err(CliError::numerical("zero curvature")(e)),
            };
            probes.push(ProbeRow {
                kind,
                s: c.s,
                lambda: pair(lambda),
                point: u,
                residual,
                pass: residual <= sc.tolerances.zero_curvature,
            });
        }
    }
    Ok(())
}

fn verdict(sections: &[Section], monodromy: &[MonodromyRow], probes: &[ProbeRow]) -> Verdict {
    let mut failures = Vec::new();
    for sec in sections {
        for fam in sec.report.families.iter().filter(|f| !f.pass) {
            let at = sec.s.map(|s| format!(" s={s}")).unwrap_or_default();
            failures.push(format!("{}{at}: {} max {:.3e}", sec.module, fam.name, fam.max));
        }
    }
    for m in monodromy.iter().filter(|m| !m.pass) {
        failures.push(format!(
            "monodromy {} λ={}{:+}i: defect {:.3e}",
            m.kind.name(),
            m.lambda[0],
            m.lambda[1],
            m.extrapolated
        ));
    }
    for p in probes.iter().filter(|p| !p.pass) {
        failures.push(format!(
            "zero curvature {} λ={}{:+}i at {:?}: {:.3e}",
            p.kind.name(),
            p.lambda[0],
            p.lambda[1],
            p.point,
            p.residual
        ));
    }
    Verdict {
        passed: failures.is_empty(),
        failures,
    }
}
