use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FiniteDifference, ScalarField};
use crate::grid::Grid;
use crate::report::{eval_points, ResidualReport};
use crate::scalar::{point_string, re, Coordinates, Scalar, Sign};

/// Relative threshold below which a diagonal entry counts as vanishing.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Diagonal metric given by its contravariant entries g^i(u).
#[derive(Debug, Clone)]
pub struct DiagonalMetric {
    pub g: Vec<ScalarField>,
}

/// Lamé coefficients H_i with signature flags ε^i; g^i = ε^i / H_i².
#[derive(Debug, Clone)]
pub struct LameFrame {
    pub h: Vec<ScalarField>,
    pub eps: Vec<Sign>,
}

/// Values and derivatives of the metric entries at a point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub n: usize,
    /// g[i] = g^i
    pub g: Vec<Scalar>,
    /// dg[i][k] = ∂_k g^i
    pub dg: Vec<Vec<Scalar>>,
    /// d2g[i][k][l] = ∂_k ∂_l g^i (empty when not requested)
    pub d2g: Vec<Vec<Vec<Scalar>>>,
}

/// Christoffel symbols Γ^i_{jk} of a diagonal metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub n: usize,
    gamma: Vec<Scalar>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> Scalar {
        self.gamma[(i * self.n + j) * self.n + k]
    }

    /// Contravariant form Γ^{ij}_k = −g^i Γ^j_{ik}.
    pub fn raised(&self, g: &[Scalar], i: usize, j: usize, k: usize) -> Scalar {
        -g[i] * self.get(j, i, k)
    }
}

/// The components R^{ij}_{il}, i ≠ j, i ≠ l, at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureComponents {
    pub n: usize,
    r: Vec<Option<Scalar>>,
}

impl CurvatureComponents {
    /// R^{ij}_{il}; `None` for index patterns that are not stored.
    pub fn get(&self, i: usize, j: usize, l: usize) -> Option<Scalar> {
        self.r[(i * self.n + j) * self.n + l]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), Scalar)> + '_ {
        let n = self.n;
        self.r.iter().enumerate().filter_map(move |(idx, v)| {
            v.map(|v| ((idx / (n * n), (idx / n) % n, idx % n), v))
        })
    }
}

impl DiagonalMetric {
    pub fn new(g: Vec<ScalarField>) -> Result<Self> {
        if g.len() < 2 {
            return Err(Error::InvalidParameter(
                "metric dimension must be at least 2".into(),
            ));
        }
        Ok(DiagonalMetric { g })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn euclidean(n: usize) -> Self {
        DiagonalMetric {
            g: (0..n).map(|_| ScalarField::constant(re(1.0))).collect(),
        }
    }

    /// Constant diagonal metric diag(c_1, …, c_N).
    pub fn constant(c: &[f64]) -> Self {
        DiagonalMetric {
            g: c.iter().map(|&x| ScalarField::constant(re(x))).collect(),
        }
    }

    pub fn with_fd(mut self, fd: FiniteDifference) -> Self {
        for g in &mut self.g {
            g.fd = fd;
        }
        self
    }

    /// Entry values at `u`, rejecting vanishing entries.
    pub fn values(&self, u: &[Scalar]) -> Result<Vec<Scalar>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        let g = self
            .g
            .iter()
            .map(|f| f.eval(u))
            .collect::<Result<Vec<_>>>()?;
        check_nondegenerate(&g, &g, u)?;
        Ok(g)
    }

    pub fn jet(&self, u: &[Scalar], second: bool) -> Result<MetricJet> {
        let n = self.dim();
        let g = self.values(u)?;
        let mut dg = vec![vec![re(0.0); n]; n];
        for i in 0..n {
            for k in 0..n {
                dg[i][k] = self.g[i].partial(k, u)?;
            }
        }
        let mut d2g = Vec::new();
        if second {
            d2g = vec![vec![vec![re(0.0); n]; n]; n];
            for i in 0..n {
                for k in 0..n {
                    for l in k..n {
                        let v = self.g[i].second_partial(k, l, u)?;
                        d2g[i][k][l] = v;
                        d2g[i][l][k] = v;
                    }
                }
            }
        }
        Ok(MetricJet { n, g, dg, d2g })
    }

    /// Lamé frame with H_i = 1/√(ε^i g^i) (principal branch).
    pub fn to_frame(&self, eps: &[Sign]) -> Result<LameFrame> {
        if eps.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: eps.len(),
            });
        }
        let h = self
            .g
            .iter()
            .zip(eps)
            .map(|(g, &e)| {
                let g = g.clone();
                let fd = g.fd;
                ScalarField::try_new(move |u| Ok(1.0 / (e.scalar() * g.eval(u)?).sqrt()))
                    .with_fd(fd)
            })
            .collect();
        Ok(LameFrame {
            h,
            eps: eps.to_vec(),
        })
    }
}

pub(crate) fn check_nondegenerate(g: &[Scalar], scale: &[Scalar], u: &[Scalar]) -> Result<()> {
    let s = scale.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (i, z) in g.iter().enumerate() {
        if z.norm() <= DEGENERACY_THRESHOLD * s || s == 0.0 {
            return Err(Error::DegenerateMetric {
                component: i,
                point: point_string(u),
            });
        }
    }
    Ok(())
}

impl LameFrame {
    pub fn new(h: Vec<ScalarField>, eps: Vec<Sign>) -> Result<Self> {
        if h.len() != eps.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len(),
                found: eps.len(),
            });
        }
        if h.len() < 2 {
            return Err(Error::InvalidParameter(
                "frame dimension must be at least 2".into(),
            ));
        }
        Ok(LameFrame { h, eps })
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn with_fd(mut self, fd: FiniteDifference) -> Self {
        for h in &mut self.h {
            h.fd = fd;
        }
        self
    }

    /// g^i = ε^i / H_i².
    pub fn to_metric(&self) -> DiagonalMetric {
        DiagonalMetric {
            g: self
                .h
                .iter()
                .zip(&self.eps)
                .map(|(h, &e)| {
                    let h = h.clone();
                    let fd = h.fd;
                    ScalarField::try_new(move |u| {
                        let v = h.eval(u)?;
                        Ok(e.scalar() / (v * v))
                    })
                    .with_fd(fd)
                })
                .collect(),
        }
    }

    pub fn values(&self, u: &[Scalar]) -> Result<Vec<Scalar>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        let h = self
            .h
            .iter()
            .map(|f| f.eval(u))
            .collect::<Result<Vec<_>>>()?;
        for (i, v) in h.iter().enumerate() {
            if *v == re(0.0) {
                return Err(Error::ZeroLameCoefficient {
                    index: i,
                    point: point_string(u),
                });
            }
        }
        Ok(h)
    }
}

/// Γ^i_{ik} = Γ^i_{ki} = −∂_k g^i / (2 g^i); Γ^i_{jj} = ½ g^i/(g^j)² ∂_i g^j, i ≠ j;
/// all symbols with three distinct indices are exactly zero.
pub fn christoffel_from_jet(jet: &MetricJet) -> Christoffel {
    let n = jet.n;
    let mut gamma = vec![re(0.0); n * n * n];
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    for i in 0..n {
        for k in 0..n {
            let v = -jet.dg[i][k] / (2.0 * jet.g[i]);
            gamma[idx(i, i, k)] = v;
            gamma[idx(i, k, i)] = v;
        }
        for j in 0..n {
            if j != i {
                gamma[idx(i, j, j)] = 0.5 * jet.g[i] / (jet.g[j] * jet.g[j]) * jet.dg[j][i];
            }
        }
    }
    Christoffel { n, gamma }
}

pub fn christoffel(metric: &DiagonalMetric, point: &Coordinates) -> Result<Christoffel> {
    point.check_dim(metric.dim())?;
    Ok(christoffel_from_jet(&metric.jet(point.as_slice(), false)?))
}

/// R^{ij}_{il} from the closed-form expressions in g^i and its first and
/// second partials.
pub fn riemann_from_jet(jet: &MetricJet) -> CurvatureComponents {
    let n = jet.n;
    let g = &jet.g;
    let d = &jet.dg;
    let dd = &jet.d2g;
    let mut r = vec![None; n * n * n];
    for i in 0..n {
        let gi = g[i];
        let gi2 = gi * gi;
        for j in 0..n {
            if j == i {
                continue;
            }
            let gj = g[j];
            for l in 0..n {
                if l == i {
                    continue;
                }
                let v = if j != l {
                    let gl = g[l];
                    // ∂_l ( g^j (g^i)^{-2} ∂_j g^i )
                    let dl = d[j][l] / gi2 * d[i][j] - 2.0 * gj / (gi2 * gi) * d[i][l] * d[i][j]
                        + gj / gi2 * dd[i][j][l];
                    -0.5 * gi * dl - 0.25 * gj / gi2 * d[i][j] * d[i][l]
                        + 0.25 / gi * d[i][j] * d[j][l]
                        - 0.25 * gj / (gi * gl) * d[l][j] * d[i][l]
                } else {
                    // ∂_i ( (g^j)^{-1} ∂_i g^j )
                    let a = dd[j][i][i] / gj - d[j][i] * d[j][i] / (gj * gj);
                    // ∂_j ( g^j (g^i)^{-2} ∂_j g^i )
                    let b = d[j][j] / gi2 * d[i][j] - 2.0 * gj / (gi2 * gi) * d[i][j] * d[i][j]
                        + gj / gi2 * dd[i][j][j];
                    let mut v = -0.5 * gi * a - 0.5 * gi * b
                        - 0.25 * gj / gi2 * d[i][j] * d[i][j]
                        + 0.25 * gi / (gj * gj) * d[j][i] * d[j][i]
                        - 0.25 / gj * d[j][i] * d[i][i];
                    for s in 0..n {
                        if s != i {
                            v += 0.25 * g[s] / (gi * gj) * d[j][s] * d[i][s];
                        }
                    }
                    v
                };
                r[(i * n + j) * n + l] = Some(v);
            }
        }
    }
    CurvatureComponents { n, r }
}

pub fn riemann_components(metric: &DiagonalMetric, point: &Coordinates) -> Result<CurvatureComponents> {
    point.check_dim(metric.dim())?;
    let jet = metric.jet(point.as_slice(), true)?;
    let c = riemann_from_jet(&jet);
    for (_, v) in c.iter() {
        crate::field::finite(v, "curvature component", point.as_slice())?;
    }
    Ok(c)
}

/// Residual of R^{ij}_{il} = −K δ^j_l over the grid.
pub fn constant_curvature_residual(
    metric: &DiagonalMetric,
    k: Scalar,
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    if grid.dim() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            found: grid.dim(),
        });
    }
    let points = grid.points();
    let vals = eval_points(&points, |p| {
        let c = riemann_components(metric, p)?;
        let mut off = Vec::new();
        let mut diag = Vec::new();
        for ((_, j, l), v) in c.iter() {
            if j == l {
                diag.push((v + k).norm());
            } else {
                off.push(v.norm());
            }
        }
        Ok((off, diag))
    })?;
    let (off, diag): (Vec<_>, Vec<_>) = vals.into_iter().unzip();
    let mut rep = ResidualReport::new("constant curvature", grid.describe(), points, tol);
    rep.add_family("R^ij_il, j != l", &off);
    rep.add_family("R^ij_ij + K", &diag);
    Ok(rep)
}

/// Entrywise λ₁g₁ + λ₂g₂.
///
/// The combination is checked for degeneracy on `grid`, measuring each
/// entry against the size of the two terms it is built from so that
/// cancellations are detected.
pub fn pencil_combination(
    g1: &DiagonalMetric,
    g2: &DiagonalMetric,
    l1: Scalar,
    l2: Scalar,
    grid: &Grid,
) -> Result<DiagonalMetric> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: g2.dim(),
        });
    }
    let comb = combine(g1, g2, l1, l2);
    for p in grid.points() {
        check_combination(g1, g2, l1, l2, p.as_slice())?;
    }
    Ok(comb)
}

fn combine(g1: &DiagonalMetric, g2: &DiagonalMetric, l1: Scalar, l2: Scalar) -> DiagonalMetric {
    DiagonalMetric {
        g: g1
            .g
            .iter()
            .zip(&g2.g)
            .map(|(a, b)| {
                let (a, b) = (a.clone(), b.clone());
                let fd = a.fd;
                let f = {
                    let (a, b) = (a.clone(), b.clone());
                    move |u: &[Scalar]| Ok(l1 * a.eval(u)? + l2 * b.eval(u)?)
                };
                if a.has_analytic_partials() && b.has_analytic_partials() {
                    ScalarField::try_new(f)
                        .with_try_partials(move |u, k| {
                            Ok(l1 * a.partial(k, u)? + l2 * b.partial(k, u)?)
                        })
                        .with_fd(fd)
                } else {
                    ScalarField::try_new(f).with_fd(fd)
                }
            })
            .collect(),
    }
}

fn check_combination(
    g1: &DiagonalMetric,
    g2: &DiagonalMetric,
    l1: Scalar,
    l2: Scalar,
    u: &[Scalar],
) -> Result<()> {
    if u.len() != g1.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: u.len(),
        });
    }
    for i in 0..g1.dim() {
        let a = l1 * g1.g[i].eval(u)?;
        let b = l2 * g2.g[i].eval(u)?;
        let scale = a.norm() + b.norm();
        if (a + b).norm() <= DEGENERACY_THRESHOLD * scale || scale == 0.0 {
            return Err(Error::DegenerateMetric {
                component: i,
                point: point_string(u),
            });
        }
    }
    Ok(())
}

/// Γ-linearity and curvature-linearity of the pencil λ₁g₁ + λ₂g₂.
///
/// The Γ family compares the raised symbols Γ^{ij}_k = −g^i Γ^j_{ik}; it
/// certifies the connection part of compatibility. The curvature family
/// compares R^{ij}_{il} and certifies the stronger full-tensor linearity.
/// Points where a combination degenerates are skipped and counted in the
/// family note.
pub fn compatibility_check(
    g1: &DiagonalMetric,
    g2: &DiagonalMetric,
    lambdas: &[(Scalar, Scalar)],
    grid: &Grid,
    tol: f64,
) -> Result<ResidualReport> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: g2.dim(),
        });
    }
    if grid.dim() != g1.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: grid.dim(),
        });
    }
    let n = g1.dim();
    let points = grid.points();
    let mut rep = ResidualReport::new("pencil compatibility", grid.describe(), points.clone(), tol);
    for &(l1, l2) in lambdas {
        let comb = combine(g1, g2, l1, l2);
        let vals = eval_points(&points, |p| {
            let u = p.as_slice();
            if check_combination(g1, g2, l1, l2, u).is_err() {
                return Ok(None);
            }
            let j1 = g1.jet(u, true)?;
            let j2 = g2.jet(u, true)?;
            let jc = comb.jet(u, true)?;
            let (c1, c2, cc) = (
                christoffel_from_jet(&j1),
                christoffel_from_jet(&j2),
                christoffel_from_jet(&jc),
            );
            let mut gam = Vec::with_capacity(n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let d = cc.raised(&jc.g, i, j, k)
                            - l1 * c1.raised(&j1.g, i, j, k)
                            - l2 * c2.raised(&j2.g, i, j, k);
                        gam.push(d.norm());
                    }
                }
            }
            let (r1, r2, rc) = (riemann_from_jet(&j1), riemann_from_jet(&j2), riemann_from_jet(&jc));
            let curv = rc
                .iter()
                .map(|((i, j, l), v)| {
                    (v - l1 * r1.get(i, j, l).unwrap() - l2 * r2.get(i, j, l).unwrap()).norm()
                })
                .collect::<Vec<_>>();
            Ok(Some((gam, curv)))
        })?;
        let skipped = vals.iter().filter(|v| v.is_none()).count();
        let (gam, curv): (Vec<_>, Vec<_>) = vals
            .into_iter()
            .map(|v| v.unwrap_or_default())
            .unzip();
        let tag = format!("({}, {})", fmt_s(l1), fmt_s(l2));
        let note = |what: &str| {
            let mut s = what.to_string();
            if skipped > 0 {
                s.push_str(&format!("; {skipped} degenerate points skipped"));
            }
            Some(s)
        };
        rep.add_family(&format!("gamma-linearity {tag}"), &gam).note =
            note("certifies linearity of the raised connection symbols");
        rep.add_family(&format!("curvature-linearity {tag}"), &curv).note =
            note("certifies linearity of R^ij_il");
    }
    Ok(rep)
}

fn fmt_s(z: Scalar) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilEigenvalues {
    pub values: Vec<Scalar>,
    pub nonsingular: bool,
}

/// Roots of det(g₁ − λ g₂) = 0 for a diagonal pair: the ratios g₁^i/g₂^i.
pub fn pencil_eigenvalues(
    g1: &DiagonalMetric,
    g2: &DiagonalMetric,
    point: &Coordinates,
) -> Result<PencilEigenvalues> {
    point.check_dim(g1.dim())?;
    point.check_dim(g2.dim())?;
    let u = point.as_slice();
    let b = g2.values(u)?;
    let values: Vec<Scalar> = g1
        .g
        .iter()
        .zip(&b)
        .map(|(a, b)| Ok(a.eval(u)? / b))
        .collect::<Result<_>>()?;
    let mut nonsingular = true;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let scale = values[i].norm().max(values[j].norm()).max(1.0);
            if (values[i] - values[j]).norm() <= 1e-12 * scale {
                nonsingular = false;
            }
        }
    }
    Ok(PencilEigenvalues {
        values,
        nonsingular,
    })
}

/// Sampled eigenvalue functions of a diagonal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalExtraction {
    /// samples[i] = (u^i, f^i(u^i)) along the grid line through the first
    /// grid point.
    pub samples: Vec<Vec<(f64, Scalar)>>,
    pub report: ResidualReport,
}

/// Checks that g₁^i / g₂^i depends on u^i only and samples it.
pub fn extract_canonical_f(
    g1: &DiagonalMetric,
    g2: &DiagonalMetric,
    grid: &Grid,
    tol: f64,
) -> Result<CanonicalExtraction> {
    let n = g1.dim();
    if g2.dim() != n || grid.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if g2.dim() != n { g2.dim() } else { grid.dim() },
        });
    }
    let axes = match grid {
        Grid::Tensor { axes } => axes.clone(),
        Grid::Scattered { .. } => {
            return Err(Error::InvalidParameter(
                "canonical-form extraction needs a tensor grid".into(),
            ))
        }
    };
    let points = grid.points();
    let ratios: Vec<Vec<Scalar>> = eval_points(&points, |p| {
        let u = p.as_slice();
        let b = g2.values(u)?;
        (0..n).map(|i| Ok(g1.g[i].eval(u)? / b[i])).collect()
    })?;
    let mut entries = Vec::with_capacity(points.len());
    for flat in 0..points.len() {
        let idx = grid.multi_index(flat).unwrap();
        let mut e = Vec::new();
        for i in 0..n {
            for k in 0..n {
                if k == i {
                    continue;
                }
                let mut base = idx.clone();
                base[k] = 0;
                let b = grid.flat_index(&base).unwrap();
                e.push((ratios[flat][i] - ratios[b][i]).norm());
            }
        }
        entries.push(e);
    }
    let samples = (0..n)
        .map(|i| {
            (0..axes[i].len())
                .map(|a| {
                    let mut idx = vec![0; n];
                    idx[i] = a;
                    (axes[i][a], ratios[grid.flat_index(&idx).unwrap()][i])
                })
                .collect()
        })
        .collect();
    let mut report = ResidualReport::new("canonical form", grid.describe(), points, tol);
    report.add_family("ratio variation across lines", &entries);
    Ok(CanonicalExtraction { samples, report })
}

/// Canonical pair partner g₁^i = f^i(u^i) g₂^i.
pub fn canonical_partner(g2: &DiagonalMetric, f: &[crate::univariate::Univariate]) -> Result<DiagonalMetric> {
    if f.len() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g2.dim(),
            found: f.len(),
        });
    }
    Ok(DiagonalMetric {
        g: g2
            .g
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let g = g.clone();
                let fi = f[i].clone();
                let fd = g.fd;
                ScalarField::try_new(move |u| Ok(fi.value(u[i]) * g.eval(u)?)).with_fd(fd)
            })
            .collect(),
    })
}
