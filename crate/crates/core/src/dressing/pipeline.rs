use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FiniteDifference, ScalarField};
use crate::grid::Grid;
use crate::lame::{residual_suite, RotationCoefficients, SystemInstance};
use crate::metric::LameFrame;
use crate::pencil::PencilSpec;
use crate::quadrature::{Discretization, DiscretizationSpec};
use crate::report::{eval_points, ResidualReport};
use crate::scalar::{re, Coordinates, Scalar, Sign};
use crate::univariate::Univariate;

use super::kernel::{assemble_f, check_branch, AssembledKernel, ScaledKernel};
use super::marchenko::{beta_from_kernel, solve_marchenko};
use super::potential::Potentials;
use super::reduction::{reduction_pde_residual, ReductionSample};

/// Solves the integral equation with F and with F̃ at one point u and
/// compares K̃ with the rescaled K, on the nodes and on the diagonal s′ = s.
/// Differences are relative to max(1, |K̃|).
pub fn tilde_scaling_check(
    potentials: Arc<Potentials>,
    pencil: &PencilSpec,
    u: &Coordinates,
    disc: &Discretization,
    tol: f64,
) -> Result<ResidualReport> {
    let f = assemble_f(potentials, u)?;
    let mut ray = vec![disc.s];
    ray.extend(disc.nodes.iter().copied());
    ray.push(disc.s_max);
    check_branch(pencil, u, &ray)?;
    let scaled = ScaledKernel::new(f.clone(), pencil.clone(), u)?;
    let k = solve_marchenko(&f, disc)?;
    let kt = solve_marchenko(&scaled, disc)?;
    let n = k.n;
    let rel = |a: Scalar, b: Scalar| (a - b).norm() / a.norm().max(1.0);
    let mut nodes = Vec::new();
    for i in 0..n {
        let wi = scaled.weight(i, disc.s);
        for l in 0..n {
            for (m, &q) in disc.nodes.iter().enumerate() {
                let expect = scaled.weight(l, q) / wi * k.at_node(i, l, m);
                nodes.push(rel(kt.at_node(i, l, m), expect));
            }
        }
    }
    let mut diag = Vec::new();
    for i in 0..n {
        let wi = scaled.weight(i, disc.s);
        for j in 0..n {
            let expect = scaled.weight(j, disc.s) / wi * k.eval(&f, i, j, disc.s)?;
            diag.push(rel(kt.eval(&scaled, i, j, disc.s)?, expect));
        }
    }
    let mut rep = ResidualReport::new(
        "scaled kernel identity",
        format!("{} nodes on [{}, {}]", disc.len(), disc.s, disc.s_max),
        vec![u.clone()],
        tol,
    );
    rep.add_family("nodes", &[nodes]);
    rep.add_family("diagonal", &[diag]);
    Ok(rep)
}

fn default_seed() -> Univariate {
    Univariate::exp(1.0, -1.0)
}

fn default_fd_step() -> f64 {
    1e-3
}

/// Parameters of one dressing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DressingConfig {
    /// The family parameter s.
    pub s: f64,
    pub disc: DiscretizationSpec,
    /// Seed g of the frame: H_i = g(s − u^i) + Σ_l ∫ K_il(s, q) g(q − u^l) dq.
    /// It must decay along the ray; the default is e^{−x}.
    #[serde(default = "default_seed")]
    pub seed: Univariate,
    /// Step of the fourth-order differences applied to the dressed fields.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

impl DressingConfig {
    pub fn new(s: f64, disc: DiscretizationSpec) -> Self {
        DressingConfig {
            s,
            disc,
            seed: default_seed(),
            fd_step: default_fd_step(),
        }
    }

    pub fn with_seed(mut self, seed: Univariate) -> Self {
        self.seed = seed;
        self
    }
}

/// β and H at one point together with solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPoint {
    pub beta: Vec<Vec<Scalar>>,
    pub h: Vec<Scalar>,
    pub condition: f64,
    pub residual: f64,
}

type Key = Vec<u64>;

fn key(u: &[Scalar]) -> Key {
    u.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect()
}

/// Dressed fields as functions of u; solves are memoised per point.
pub struct Dressing {
    potentials: Arc<Potentials>,
    pencil: PencilSpec,
    config: DressingConfig,
    disc: Discretization,
    cache: Mutex<HashMap<Key, Arc<DressedPoint>>>,
}

impl std::fmt::Debug for Dressing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dressing")
            .field("dim", &self.potentials.dim())
            .field("config", &self.config)
            .finish()
    }
}

impl Dressing {
    pub fn new(potentials: Arc<Potentials>, pencil: PencilSpec, config: DressingConfig) -> Result<Arc<Self>> {
        pencil.check_dim(potentials.dim())?;
        let disc = config.disc.build(config.s)?;
        Ok(Arc::new(Dressing {
            potentials,
            pencil,
            config,
            disc,
            cache: Mutex::new(HashMap::new()),
        }))
    }

    pub fn dim(&self) -> usize {
        self.potentials.dim()
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn config(&self) -> &DressingConfig {
        &self.config
    }

    pub fn kernel_at(&self, u: &Coordinates) -> Result<AssembledKernel> {
        assemble_f(self.potentials.clone(), u)
    }

    /// Solves at u, or returns the cached solution.
    pub fn point(&self, u: &[Scalar]) -> Result<Arc<DressedPoint>> {
        let k = key(u);
        if let Some(p) = self.cache.lock().unwrap().get(&k) {
            return Ok(p.clone());
        }
        let p = Arc::new(self.solve(u)?);
        self.cache.lock().unwrap().insert(k, p.clone());
        Ok(p)
    }

    fn solve(&self, u: &[Scalar]) -> Result<DressedPoint> {
        let coords = Coordinates(u.to_vec());
        let f = self.kernel_at(&coords)?;
        let k = solve_marchenko(&f, &self.disc)?;
        let beta = beta_from_kernel(&k, &f)?;
        let s = re(self.config.s);
        let g = &self.config.seed;
        let n = self.dim();
        let mut h = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = g.value(s - u[i]);
            for l in 0..n {
                for (m, (&q, &w)) in self.disc.nodes.iter().zip(&self.disc.weights).enumerate() {
                    v += w * k.at_node(i, l, m) * g.value(re(q) - u[l]);
                }
            }
            h.push(v);
        }
        Ok(DressedPoint {
            beta,
            h,
            condition: k.condition,
            residual: k.residual,
        })
    }

    /// The pencil f^i(u^i − s) seen by the dressed β, flat (K₁ = K₂ = 0).
    pub fn effective_pencil(&self) -> PencilSpec {
        PencilSpec::new(
            self.pencil.f.iter().map(|f| f.shifted(re(self.config.s))).collect(),
            re(0.0),
            re(0.0),
        )
    }

    /// β and H as fields of u, with all ε^i = +1.
    pub fn instance(self: &Arc<Self>) -> Result<SystemInstance> {
        let n = self.dim();
        let fd = FiniteDifference::fourth(self.config.fd_step);
        let beta = RotationCoefficients::new(n, |i, k| {
            let d = self.clone();
            ScalarField::try_new(move |u| Ok(d.point(u)?.beta[i][k])).with_fd(fd)
        });
        let h = (0..n)
            .map(|i| {
                let d = self.clone();
                ScalarField::try_new(move |u| Ok(d.point(u)?.h[i])).with_fd(fd)
            })
            .collect();
        let frame = LameFrame::new(h, vec![Sign::Plus; n])?;
        SystemInstance::new(beta, frame, self.effective_pencil())
    }

    /// Reduction samples at every grid point: s′ = s and a few nodes near s.
    pub fn reduction_samples(&self, grid: &Grid) -> Vec<ReductionSample> {
        let s = self.config.s;
        let mut params = vec![s];
        params.extend(self.disc.nodes.iter().take(4).step_by(2).copied());
        let mut out = Vec::new();
        for u in grid.points() {
            for &a in &params {
                for &b in &params {
                    out.push(ReductionSample {
                        s: a,
                        s_prime: b,
                        u: u.clone(),
                    });
                }
            }
        }
        out
    }
}

/// Result of a dressing run.
#[derive(Debug, Clone)]
pub struct DressingOutcome {
    pub instance: SystemInstance,
    /// Reduction equations on the potentials, sampled near s.
    pub reduction: ResidualReport,
    /// Residual suite of the dressed β and H on the grid.
    pub report: ResidualReport,
    pub dressing: Arc<Dressing>,
    /// Largest condition estimate over the grid.
    pub max_condition: f64,
}

/// Checks the reduction equations, dresses at every grid point in
/// parallel and runs the residual suite on the dressed β and H.
pub fn dress(
    potentials: Arc<Potentials>,
    pencil: PencilSpec,
    config: DressingConfig,
    grid: &Grid,
    tol: f64,
    reduction_tol: f64,
) -> Result<DressingOutcome> {
    let d = Dressing::new(potentials.clone(), pencil.clone(), config)?;
    let samples = d.reduction_samples(grid);
    let reduction = reduction_pde_residual(&potentials, &pencil, &samples, reduction_tol)?;
    let points = grid.points();
    let solved = eval_points(&points, |u| d.point(&u.0))?;
    let max_condition = solved.iter().map(|p| p.condition).fold(0.0, f64::max);
    let instance = d.instance()?;
    let mut report = residual_suite(&instance, grid, tol)?;
    report.title = "dressed residual suite".into();
    Ok(DressingOutcome {
        instance,
        reduction,
        report,
        dressing: d,
        max_condition,
    })
}

/// β_ij(s, u) on a grid, as plain values.
pub fn beta_on_grid(d: &Dressing, grid: &Grid) -> Result<Vec<Vec<Vec<Scalar>>>> {
    let points = grid.points();
    Ok(eval_points(&points, |u| d.point(&u.0))?
        .into_iter()
        .map(|p| p.beta.clone())
        .collect())
}

