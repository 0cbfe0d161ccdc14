use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::metric::LameFrame;
use crate::pencil::PencilSpec;
use crate::report::{eval_points, ResidualReport};
use crate::scalar::{is_positive_real, point_string, re, Coordinates, Mode, Scalar, Sign};

/// Off-diagonal matrix field β_ik(u).
#[derive(Debug, Clone)]
pub struct RotationCoefficients {
    n: usize,
    beta: Vec<Option<ScalarField>>,
}

impl RotationCoefficients {
    pub fn new<F>(n: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> ScalarField,
    {
        let mut beta = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                beta.push(if i == k { None } else { Some(f(i, k)) });
            }
        }
        RotationCoefficients { n, beta }
    }

    pub fn zero(n: usize) -> Self {
        RotationCoefficients::new(n, |_, _| ScalarField::zero())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> &ScalarField {
        self.beta[i * self.n + k]
            .as_ref()
            .expect("rotation coefficients have no diagonal")
    }

    pub fn set(&mut self, i: usize, k: usize, field: ScalarField) {
        assert!(i != k, "rotation coefficients have no diagonal");
        self.beta[i * self.n + k] = Some(field);
    }

    /// Copy with β_ik replaced by β_ik + δ.
    pub fn perturbed(&self, i: usize, k: usize, delta: Scalar) -> Self {
        let mut out = self.clone();
        let f = self.get(i, k).clone();
        let fd = f.fd;
        out.set(i, k, ScalarField::try_new(move |u| Ok(f.eval(u)? + delta)).with_fd(fd));
        out
    }

    /// β values at u with zero diagonal.
    pub fn values(&self, u: &[Scalar]) -> Result<Vec<Vec<Scalar>>> {
        let mut b = vec![vec![re(0.0); self.n]; self.n];
        for i in 0..self.n {
            for k in 0..self.n {
                if i != k {
                    b[i][k] = self.get(i, k).eval(u)?;
                }
            }
        }
        Ok(b)
    }

    /// Relabels coordinates: the new index a corresponds to the old index perm[a].
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let inv = inverse_perm(perm);
        RotationCoefficients::new(self.n, |i, k| {
            let f = self.get(perm[i], perm[k]).clone();
            permute_field(f, &inv)
        })
    }
}

fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (a, &p) in perm.iter().enumerate() {
        inv[p] = a;
    }
    inv
}

/// Field in relabeled coordinates: v[a] = u[perm[a]], so u[p] = v[inv[p]].
fn permute_field(f: ScalarField, inv: &[usize]) -> ScalarField {
    let inv = inv.to_vec();
    let fd = f.fd;
    ScalarField::try_new(move |v| {
        let u: Vec<Scalar> = inv.iter().map(|&a| v[a]).collect();
        f.eval(&u)
    })
    .with_fd(fd)
}

impl LameFrame {
    /// Relabels coordinates: the new index a corresponds to the old index perm[a].
    pub fn permuted(&self, perm: &[usize]) -> LameFrame {
        let inv = inverse_perm(perm);
        LameFrame {
            h: perm.iter().map(|&p| permute_field(self.h[p].clone(), &inv)).collect(),
            eps: perm.iter().map(|&p| self.eps[p]).collect(),
        }
    }
}

impl PencilSpec {
    pub fn permuted(&self, perm: &[usize]) -> PencilSpec {
        PencilSpec::new(perm.iter().map(|&p| self.f[p].clone()).collect(), self.k1, self.k2)
    }
}

/// β_ik = (1/H_i) ∂H_k/∂u^i.
pub fn rotation_from_frame(frame: &LameFrame) -> RotationCoefficients {
    RotationCoefficients::new(frame.dim(), |i, k| {
        let hi = frame.h[i].clone();
        let hk = frame.h[k].clone();
        let fd = hk.fd;
        ScalarField::try_new(move |u| {
            let d = hi.eval(u)?;
            if d == re(0.0) {
                return Err(Error::ZeroLameCoefficient {
                    index: i,
                    point: point_string(u),
                });
            }
            Ok(hk.partial(i, u)? / d)
        })
        .with_fd(fd)
    })
}

/// β, H and the pencil of one solution candidate.
#[derive(Debug, Clone)]
pub struct SystemInstance {
    pub beta: RotationCoefficients,
    pub frame: LameFrame,
    pub pencil: PencilSpec,
}

impl SystemInstance {
    pub fn new(beta: RotationCoefficients, frame: LameFrame, pencil: PencilSpec) -> Result<Self> {
        let n = frame.dim();
        if beta.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: beta.dim(),
            });
        }
        pencil.check_dim(n)?;
        Ok(SystemInstance {
            beta,
            frame,
            pencil,
        })
    }

    /// Instance whose β is derived from the frame.
    pub fn from_frame(frame: LameFrame, pencil: PencilSpec) -> Result<Self> {
        let beta = rotation_from_frame(&frame);
        SystemInstance::new(beta, frame, pencil)
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn permuted(&self, perm: &[usize]) -> SystemInstance {
        SystemInstance {
            beta: self.beta.permuted(perm),
            frame: self.frame.permuted(perm),
            pencil: self.pencil.permuted(perm),
        }
    }

    /// Whether f^i(u^i) are pairwise distinct, sampled along the grid axes.
    pub fn pencil_nonsingular(&self, grid: &Grid) -> bool {
        let mut xs: Vec<Scalar> = Vec::new();
        for p in grid.points() {
            xs.extend(p.0.iter().copied());
        }
        self.pencil.is_nonsingular(&xs)
    }
}

// Pointwise expressions; each vanishes on solutions.

/// ∂_k β_ij − β_ik β_kj
pub fn lam1_expr(beta: &RotationCoefficients, i: usize, j: usize, k: usize, u: &[Scalar]) -> Result<Scalar> {
    Ok(beta.get(i, j).partial(k, u)? - beta.get(i, k).eval(u)? * beta.get(k, j).eval(u)?)
}

/// ε^i ∂_i β_ij + ε^j ∂_j β_ji + Σ_{s≠i,j} ε^s β_si β_sj + K₂ H_i H_j
pub fn lam2_expr(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    k2: Scalar,
    i: usize,
    j: usize,
    u: &[Scalar],
) -> Result<Scalar> {
    let e = |a: usize| frame.eps[a].scalar();
    let mut v = e(i) * beta.get(i, j).partial(i, u)? + e(j) * beta.get(j, i).partial(j, u)?;
    for s in 0..beta.dim() {
        if s != i && s != j {
            v += e(s) * beta.get(s, i).eval(u)? * beta.get(s, j).eval(u)?;
        }
    }
    Ok(v + k2 * frame.h[i].eval(u)? * frame.h[j].eval(u)?)
}

/// ε^i f^i ∂_i β_ij + ½ ε^i f^i' β_ij + (i↔j) + Σ_{s≠i,j} ε^s f^s β_si β_sj + K₁ H_i H_j
pub fn lam3_expr(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    pencil: &PencilSpec,
    i: usize,
    j: usize,
    u: &[Scalar],
) -> Result<Scalar> {
    let e = |a: usize| frame.eps[a].scalar();
    let half = |a: usize, b: usize| -> Result<Scalar> {
        Ok(e(a) * pencil.f_at(a, u) * beta.get(a, b).partial(a, u)?
            + 0.5 * e(a) * pencil.df_at(a, u) * beta.get(a, b).eval(u)?)
    };
    let mut v = half(i, j)? + half(j, i)?;
    for s in 0..beta.dim() {
        if s != i && s != j {
            v += e(s) * pencil.f_at(s, u) * beta.get(s, i).eval(u)? * beta.get(s, j).eval(u)?;
        }
    }
    Ok(v + pencil.k1 * frame.h[i].eval(u)? * frame.h[j].eval(u)?)
}

/// ∂_i H_j − β_ij H_i
pub fn frame_expr(beta: &RotationCoefficients, frame: &LameFrame, i: usize, j: usize, u: &[Scalar]) -> Result<Scalar> {
    Ok(frame.h[j].partial(i, u)? - beta.get(i, j).eval(u)? * frame.h[i].eval(u)?)
}

/// ∂_i β_ij minus the right-hand side of the solved form, which requires
/// f^i(u^i) ≠ f^j(u^j).
pub fn alt_form_expr(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    pencil: &PencilSpec,
    i: usize,
    j: usize,
    u: &[Scalar],
) -> Result<Scalar> {
    let e = |a: usize| frame.eps[a].scalar();
    let (fi, fj) = (pencil.f_at(i, u), pencil.f_at(j, u));
    let den = fj - fi;
    if den.norm() <= 1e-12 * fi.norm().max(fj.norm()).max(1.0) {
        return Err(Error::EigenvalueCollision {
            i,
            j,
            point: point_string(u),
        });
    }
    let mut v = beta.get(i, j).partial(i, u)?
        - 0.5 * pencil.df_at(i, u) / den * beta.get(i, j).eval(u)?
        - 0.5 * e(i) * e(j) * pencil.df_at(j, u) / den * beta.get(j, i).eval(u)?;
    for s in 0..beta.dim() {
        if s != i && s != j {
            v += e(i) * e(s) * (fj - pencil.f_at(s, u)) / den
                * beta.get(s, i).eval(u)?
                * beta.get(s, j).eval(u)?;
        }
    }
    v -= e(i) * (pencil.k1 - pencil.k2 * fj) / den * frame.h[i].eval(u)? * frame.h[j].eval(u)?;
    Ok(v)
}

fn check_grid(grid: &Grid, n: usize) -> Result<Vec<Coordinates>> {
    if grid.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: grid.dim(),
        });
    }
    Ok(grid.points())
}

fn distinct_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    t.push((i, j, k));
                }
            }
        }
    }
    t
}

fn unordered_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut t = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            t.push((i, j));
        }
    }
    t
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                t.push((i, j));
            }
        }
    }
    t
}

fn single_family<F>(title: &str, family: &str, grid: &Grid, n: usize, tol: f64, f: F) -> Result<ResidualReport>
where
    F: Fn(&[Scalar]) -> Result<Vec<f64>> + Sync + Send,
{
    let points = check_grid(grid, n)?;
    let entries = eval_points(&points, |p| f(p.as_slice()))?;
    let mut rep = ResidualReport::new(title, grid.describe(), points, tol);
    rep.add_family(family, &entries);
    Ok(rep)
}

pub fn residual_lam1(beta: &RotationCoefficients, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    let triples = distinct_triples(beta.dim());
    single_family("lam1", "lam1", grid, beta.dim(), tol, |u| {
        triples
            .iter()
            .map(|&(i, j, k)| Ok(lam1_expr(beta, i, j, k, u)?.norm()))
            .collect()
    })
}

pub fn residual_lam2(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    k2: Scalar,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let pairs = unordered_pairs(beta.dim());
    single_family("lam2", "lam2", grid, beta.dim(), tol, |u| {
        pairs
            .iter()
            .map(|&(i, j)| Ok(lam2_expr(beta, frame, k2, i, j, u)?.norm()))
            .collect()
    })
}

pub fn residual_lam3(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    pencil: &PencilSpec,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    pencil.check_dim(beta.dim())?;
    let pairs = unordered_pairs(beta.dim());
    single_family("lam3", "lam3", grid, beta.dim(), tol, |u| {
        pairs
            .iter()
            .map(|&(i, j)| Ok(lam3_expr(beta, frame, pencil, i, j, u)?.norm()))
            .collect()
    })
}

pub fn residual_frame(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let pairs = ordered_pairs(beta.dim());
    single_family("frame", "frame", grid, beta.dim(), tol, |u| {
        pairs
            .iter()
            .map(|&(i, j)| Ok(frame_expr(beta, frame, i, j, u)?.norm()))
            .collect()
    })
}

pub fn residual_alt_form(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    pencil: &PencilSpec,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    pencil.check_dim(beta.dim())?;
    let pairs = ordered_pairs(beta.dim());
    single_family("alt-form", "alt-form", grid, beta.dim(), tol, |u| {
        pairs
            .iter()
            .map(|&(i, j)| Ok(alt_form_expr(beta, frame, pencil, i, j, u)?.norm()))
            .collect()
    })
}

/// Residuals of the constant-eigenvalue system: the n-wave family, the
/// solved second family with constants c^i, and the frame equation.
pub fn constant_f_residual(
    beta: &RotationCoefficients,
    frame: &LameFrame,
    c: &[Scalar],
    k1: Scalar,
    k2: Scalar,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    let n = beta.dim();
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.len(),
        });
    }
    for (i, ci) in c.iter().enumerate() {
        if ci.norm() == 0.0 {
            return Err(Error::InvalidConstants(format!("c^{i} is zero")));
        }
        for (j, cj) in c.iter().enumerate().skip(i + 1) {
            if (ci - cj).norm() <= 1e-12 * ci.norm().max(cj.norm()) {
                return Err(Error::InvalidConstants(format!("c^{i} = c^{j}")));
            }
        }
    }
    let points = check_grid(grid, n)?;
    let triples = distinct_triples(n);
    let pairs = ordered_pairs(n);
    let e = |a: usize| frame.eps[a].scalar();
    let vals = eval_points(&points, |p| {
        let u = p.as_slice();
        let l1 = triples
            .iter()
            .map(|&(i, j, k)| Ok(lam1_expr(beta, i, j, k, u)?.norm()))
            .collect::<Result<Vec<_>>>()?;
        let mut l2 = Vec::new();
        for &(i, j) in &pairs {
            let den = c[j] - c[i];
            let mut v = beta.get(i, j).partial(i, u)?;
            for s in 0..n {
                if s != i && s != j {
                    v += e(i) * e(s) * (c[j] - c[s]) / den * beta.get(s, i).eval(u)? * beta.get(s, j).eval(u)?;
                }
            }
            v -= e(i) * (k1 - k2 * c[j]) / den * frame.h[i].eval(u)? * frame.h[j].eval(u)?;
            l2.push(v.norm());
        }
        let fr = pairs
            .iter()
            .map(|&(i, j)| Ok(frame_expr(beta, frame, i, j, u)?.norm()))
            .collect::<Result<Vec<_>>>()?;
        Ok((l1, l2, fr))
    })?;
    let mut rep = ResidualReport::new("constant eigenvalues", grid.describe(), points, tol);
    let (mut a, mut b, mut d) = (Vec::new(), Vec::new(), Vec::new());
    for (x, y, z) in vals {
        a.push(x);
        b.push(y);
        d.push(z);
    }
    rep.add_family("lam1co", &a);
    rep.add_family("lam2co", &b);
    rep.add_family("frame", &d);
    Ok(rep)
}

/// The full residual suite: lam1, lam2 (with K₂), lam3, frame, and the
/// solved form when the pencil is nonsingular on the grid.
pub fn residual_suite(inst: &SystemInstance, grid: &Grid, tol: f64) -> Result<ResidualReport> {
    let mut rep = residual_lam1(&inst.beta, grid, tol)?;
    rep.title = "residual suite".into();
    rep.merge(residual_lam2(&inst.beta, &inst.frame, inst.pencil.k2, grid, tol)?);
    rep.merge(residual_lam3(&inst.beta, &inst.frame, &inst.pencil, grid, tol)?);
    rep.merge(residual_frame(&inst.beta, &inst.frame, grid, tol)?);
    if inst.pencil_nonsingular(grid) {
        match residual_alt_form(&inst.beta, &inst.frame, &inst.pencil, grid, tol) {
            Ok(r) => rep.merge(r),
            Err(Error::EigenvalueCollision { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// Frame and rotation coefficients rescaled by √(ϵ^i f^i(u^i)).
#[derive(Debug, Clone)]
pub struct ScaledFrame {
    pub h_tilde: Vec<ScalarField>,
    pub beta_tilde: RotationCoefficients,
    pub eps_hat: Vec<Sign>,
}

impl ScaledFrame {
    /// The rescaled frame with signature ε^i ϵ^i.
    pub fn frame(&self, eps: &[Sign]) -> LameFrame {
        LameFrame {
            h: self.h_tilde.clone(),
            eps: eps.iter().zip(&self.eps_hat).map(|(&a, &b)| a * b).collect(),
        }
    }
}

/// H̃_i = H_i/√(ϵ^i f^i(u^i)), β̃_ik = √(ϵ^i f^i)/√(ϵ^k f^k) β_ik with β
/// derived from the frame. The radicands are validated on `domain`: in
/// real mode they must be positive, in complex mode nonzero.
pub fn scale_frame(
    frame: &LameFrame,
    pencil: &PencilSpec,
    eps_hat: &[Sign],
    mode: Mode,
    domain: &Grid,
) -> Result<ScaledFrame> {
    let n = frame.dim();
    pencil.check_dim(n)?;
    if eps_hat.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: eps_hat.len(),
        });
    }
    for p in check_grid(domain, n)? {
        let u = p.as_slice();
        for i in 0..n {
            let w = eps_hat[i].scalar() * pencil.f_at(i, u);
            let bad = match mode {
                Mode::Real => !is_positive_real(w),
                Mode::Complex => w.norm() == 0.0,
            };
            if bad {
                return Err(Error::InvalidSign {
                    index: i,
                    point: point_string(u),
                });
            }
        }
    }
    let root = |i: usize| {
        let f = pencil.f[i].clone();
        let e = eps_hat[i].scalar();
        move |u: &[Scalar]| (e * f.value(u[i])).sqrt()
    };
    let h_tilde = (0..n)
        .map(|i| {
            let h = frame.h[i].clone();
            let r = root(i);
            let fd = h.fd;
            ScalarField::try_new(move |u| Ok(h.eval(u)? / r(u))).with_fd(fd)
        })
        .collect();
    let beta = rotation_from_frame(frame);
    let beta_tilde = RotationCoefficients::new(n, |i, k| {
        let b = beta.get(i, k).clone();
        let (ri, rk) = (root(i), root(k));
        let fd = b.fd;
        ScalarField::try_new(move |u| Ok(ri(u) / rk(u) * b.eval(u)?)).with_fd(fd)
    });
    Ok(ScaledFrame {
        h_tilde,
        beta_tilde,
        eps_hat: eps_hat.to_vec(),
    })
}

/// Result of integrating ∂_i H_j = β_ij H_i from coordinate-line data.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReconstruction {
    /// H at the target point.
    pub h: Vec<Scalar>,
    /// Max difference between the two predecessor orderings at the target
    /// (zero for N = 2, where the ordering is unique).
    pub path_residual: f64,
    pub nodes: usize,
}

/// Reconstructs H at `target` from β and the values of each H_j on the
/// j-th coordinate line through `base` (`line_data[j]` is evaluated with
/// all coordinates except u^j held at the base point).
///
/// Since ∂_j H_j is not constrained by the frame equation, H_j is marched
/// across the lattice between base and target with trapezoidal steps in the
/// directions k ≠ j. At every node the N coupled trapezoidal updates are
/// solved together. The predecessor for H_j is taken along the highest
/// index k ≠ j with a nonzero lattice offset; the alternative ordering
/// (lowest index) gives the path-independence residual.
pub fn frame_from_rotation(
    beta: &RotationCoefficients,
    line_data: &[ScalarField],
    base: &Coordinates,
    target: &Coordinates,
    step: f64,
) -> Result<FrameReconstruction> {
    let n = beta.dim();
    base.check_dim(n)?;
    target.check_dim(n)?;
    if line_data.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: line_data.len(),
        });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("step {step}")));
    }
    let counts: Vec<usize> = (0..n)
        .map(|k| ((target.0[k] - base.0[k]).norm() / step).ceil() as usize)
        .collect();
    let delta: Vec<Scalar> = (0..n)
        .map(|k| {
            if counts[k] == 0 {
                re(0.0)
            } else {
                (target.0[k] - base.0[k]) / counts[k] as f64
            }
        })
        .collect();
    let primary = march(beta, line_data, base, &counts, &delta, true)?;
    let path_residual = if n > 2 {
        let alt = march(beta, line_data, base, &counts, &delta, false)?;
        primary
            .iter()
            .zip(&alt)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(FrameReconstruction {
        h: primary,
        path_residual,
        nodes: counts.iter().map(|c| c + 1).product(),
    })
}

fn march(
    beta: &RotationCoefficients,
    line_data: &[ScalarField],
    base: &Coordinates,
    counts: &[usize],
    delta: &[Scalar],
    highest_first: bool,
) -> Result<Vec<Scalar>> {
    let n = counts.len();
    let shape: Vec<usize> = counts.iter().map(|c| c + 1).collect();
    let total: usize = shape.iter().product();
    let mut strides = vec![1usize; n];
    for k in (0..n - 1).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    let mut hs: Vec<Vec<Scalar>> = Vec::with_capacity(total);
    let mut betas: Vec<Vec<Vec<Scalar>>> = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for k in 0..n {
            idx[k] = rem / strides[k];
            rem %= strides[k];
        }
        let u: Vec<Scalar> = (0..n).map(|k| base.0[k] + delta[k] * idx[k] as f64).collect();
        let b = beta.values(&u)?;
        let mut a = DMatrix::<Scalar>::identity(n, n);
        let mut rhs = DVector::<Scalar>::zeros(n);
        for j in 0..n {
            let dirs = (0..n).filter(|&k| k != j && idx[k] > 0);
            let dir = if highest_first { dirs.max() } else { dirs.min() };
            match dir {
                None => {
                    let mut line = base.0.clone();
                    line[j] = u[j];
                    rhs[j] = line_data[j].eval(&line)?;
                }
                Some(i) => {
                    let prev = flat - strides[i];
                    let half = delta[i] * 0.5;
                    a[(j, i)] = -half * b[i][j];
                    rhs[j] = hs[prev][j] + half * betas[prev][i][j] * hs[prev][i];
                }
            }
        }
        let sol = a.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        hs.push(sol.iter().copied().collect());
        betas.push(b);
    }
    Ok(hs.pop().unwrap())
}
