//! Linear problems whose compatibility is the Lamé-type system.
//!
//! All kinds share one shape. With scale factors ρ_i and a curvature root κ,
//!
//! ∂_j φ_i = (ρ_i/ρ_j) β_ij φ_j,
//! ∂_i φ_i = −Σ_{k≠i} (ρ_k/ρ_i) β_ki φ_k + (κ/ρ_i) H_i ψ,
//! ∂_i ψ = −(κ/ρ_i) H_i φ_i.
//!
//! | kind               | ρ_i             | κ            | ψ   |
//! |--------------------|-----------------|--------------|-----|
//! | darboux            | √ε^i            | 0            | no  |
//! | constant-curvature | √ε^i            | √K₂          | yes |
//! | flat-pencil        | √(ε^i(λ+f^i))   | 0            | no  |
//! | full-pencil        | √(ε^i(λ+f^i))   | √(λK₂ + K₁)  | yes |
//!
//! Square roots are principal. Writing the coefficients as ratios of one
//! root per index keeps them consistent for every sign pattern, whereas the
//! symmetric root √(ε^i ε^j) is not.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FiniteDifference, StencilOrder};
use crate::lame::SystemInstance;
use crate::scalar::{point_string, re, Coordinates, Scalar};

/// Spectral points with |λ + f^i| below this are rejected.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaxKind {
    Darboux,
    ConstantCurvature,
    FlatPencil,
    FullPencil,
}

impl LaxKind {
    pub const ALL: [LaxKind; 4] = [
        LaxKind::Darboux,
        LaxKind::ConstantCurvature,
        LaxKind::FlatPencil,
        LaxKind::FullPencil,
    ];

    /// Whether the state carries ψ.
    pub fn has_psi(self) -> bool {
        matches!(self, LaxKind::ConstantCurvature | LaxKind::FullPencil)
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, LaxKind::FlatPencil | LaxKind::FullPencil)
    }

    pub fn name(self) -> &'static str {
        match self {
            LaxKind::Darboux => "darboux",
            LaxKind::ConstantCurvature => "constant-curvature",
            LaxKind::FlatPencil => "flat-pencil",
            LaxKind::FullPencil => "full-pencil",
        }
    }

    /// State dimension for an N-dimensional instance.
    pub fn state_dim(self, n: usize) -> usize {
        if self.has_psi() {
            n + 1
        } else {
            n
        }
    }
}

impl std::str::FromStr for LaxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LaxKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown Lax kind '{s}'")))
    }
}

/// (φ, ψ) at spectral parameter λ.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxState {
    pub phi: Vec<Scalar>,
    pub psi: Option<Scalar>,
    pub lambda: Scalar,
}

impl LaxState {
    pub fn new(phi: Vec<Scalar>, psi: Option<Scalar>, lambda: Scalar) -> Self {
        LaxState { phi, psi, lambda }
    }

    /// Checks that the state fits `kind` on an N-dimensional instance.
    pub fn check(&self, kind: LaxKind, n: usize) -> Result<()> {
        if self.phi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.phi.len(),
            });
        }
        if self.psi.is_some() != kind.has_psi() {
            return Err(Error::InvalidParameter(format!(
                "{} states {} ψ",
                kind.name(),
                if kind.has_psi() { "require" } else { "do not carry" }
            )));
        }
        Ok(())
    }

    pub fn to_vector(&self) -> DMatrix<Scalar> {
        let mut v = self.phi.clone();
        v.extend(self.psi);
        DMatrix::from_column_slice(v.len(), 1, &v)
    }

    fn from_vector(v: &DMatrix<Scalar>, n: usize, lambda: Scalar) -> Self {
        LaxState {
            phi: (0..n).map(|i| v[(i, 0)]).collect(),
            psi: (v.nrows() > n).then(|| v[(n, 0)]),
            lambda,
        }
    }
}

/// Scale factors ρ_i and the curvature root κ at one point.
struct Coefficients {
    rho: Vec<Scalar>,
    kappa: Scalar,
}

fn coefficients(kind: LaxKind, data: &SystemInstance, u: &[Scalar], lambda: Scalar) -> Result<Coefficients> {
    let n = data.dim();
    let eps = |i: usize| data.frame.eps[i].scalar();
    let rho = match kind {
        LaxKind::Darboux | LaxKind::ConstantCurvature => (0..n).map(|i| eps(i).sqrt()).collect(),
        LaxKind::FlatPencil | LaxKind::FullPencil => (0..n)
            .map(|i| {
                let shifted = lambda + data.pencil.f_at(i, u);
                if shifted.norm() < SINGULAR_THRESHOLD {
                    return Err(Error::SingularSpectralPoint {
                        index: i,
                        point: point_string(u),
                    });
                }
                Ok((eps(i) * shifted).sqrt())
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let kappa = match kind {
        LaxKind::Darboux | LaxKind::FlatPencil => re(0.0),
        LaxKind::ConstantCurvature => data.pencil.k2.sqrt(),
        LaxKind::FullPencil => (lambda * data.pencil.k2 + data.pencil.k1).sqrt(),
    };
    Ok(Coefficients { rho, kappa })
}

fn check_point(data: &SystemInstance, u: &[Scalar]) -> Result<()> {
    if u.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: u.len(),
        });
    }
    Ok(())
}

/// ∂(φ, ψ)/∂u^i at `point`, evaluated equation by equation.
pub fn lax_rhs(kind: LaxKind, state: &LaxState, i: usize, data: &SystemInstance, point: &Coordinates) -> Result<LaxState> {
    let n = data.dim();
    let u = point.as_slice();
    check_point(data, u)?;
    state.check(kind, n)?;
    if i >= n {
        return Err(Error::InvalidParameter(format!("direction {i} out of range")));
    }
    let c = coefficients(kind, data, u, state.lambda)?;
    let beta = |a: usize, b: usize| data.beta.get(a, b).eval(u);
    let mut phi = vec![re(0.0); n];
    for (k, d) in phi.iter_mut().enumerate() {
        if k != i {
            *d = c.rho[k] / c.rho[i] * beta(k, i)? * state.phi[i];
        }
    }
    let mut diag = re(0.0);
    for k in 0..n {
        if k != i {
            diag -= c.rho[k] / c.rho[i] * beta(k, i)? * state.phi[k];
        }
    }
    let mut psi = None;
    if let Some(p) = state.psi {
        let coupling = c.kappa / c.rho[i] * data.frame.h[i].eval(u)?;
        diag += coupling * p;
        psi = Some(-coupling * state.phi[i]);
    }
    phi[i] = diag;
    Ok(LaxState {
        phi,
        psi,
        lambda: state.lambda,
    })
}

/// The matrices A_k of ∂_k(φ, ψ) = A_k (φ, ψ) for one kind, instance and λ.
#[derive(Debug, Clone)]
pub struct Connection {
    pub kind: LaxKind,
    pub data: SystemInstance,
    pub lambda: Scalar,
}

impl Connection {
    pub fn new(kind: LaxKind, data: SystemInstance, lambda: Scalar) -> Self {
        Connection { kind, data, lambda }
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn state_dim(&self) -> usize {
        self.kind.state_dim(self.dim())
    }

    /// A_k for every direction k at u.
    pub fn matrices(&self, u: &[Scalar]) -> Result<Vec<DMatrix<Scalar>>> {
        check_point(&self.data, u)?;
        let n = self.dim();
        let d = self.state_dim();
        let c = coefficients(self.kind, &self.data, u, self.lambda)?;
        let beta = self.data.beta.values(u)?;
        let h = if self.kind.has_psi() {
            self.data.frame.values(u)?
        } else {
            Vec::new()
        };
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut a = DMatrix::from_element(d, d, re(0.0));
            for m in 0..n {
                if m != k {
                    let r = c.rho[m] / c.rho[k];
                    a[(m, k)] = r * beta[m][k];
                    a[(k, m)] = -r * beta[m][k];
                }
            }
            if self.kind.has_psi() {
                let coupling = c.kappa / c.rho[k] * h[k];
                a[(k, n)] = coupling;
                a[(n, k)] = -coupling;
            }
            out.push(a);
        }
        Ok(out)
    }

    /// A_k at u.
    pub fn matrix(&self, k: usize, u: &[Scalar]) -> Result<DMatrix<Scalar>> {
        let mut all = self.matrices(u)?;
        if k >= all.len() {
            return Err(Error::InvalidParameter(format!("direction {k} out of range")));
        }
        Ok(all.swap_remove(k))
    }

    /// Σ_k d^k A_k at u, the generator along a direction d.
    fn along(&self, u: &[Scalar], dir: &[Scalar]) -> Result<DMatrix<Scalar>> {
        let d = self.state_dim();
        let mut a = DMatrix::from_element(d, d, re(0.0));
        for (k, m) in self.matrices(u)?.into_iter().enumerate() {
            if dir[k] != re(0.0) {
                a += m * dir[k];
            }
        }
        Ok(a)
    }
}

/// Fixed-step RK4 settings: each polyline segment is split into
/// `steps_per_segment` equal steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stepper {
    pub steps_per_segment: usize,
}

impl Default for Stepper {
    fn default() -> Self {
        Stepper { steps_per_segment: 64 }
    }
}

impl Stepper {
    pub fn new(steps_per_segment: usize) -> Self {
        Stepper { steps_per_segment }
    }

    fn halved(self) -> Self {
        Stepper {
            steps_per_segment: 2 * self.steps_per_segment,
        }
    }
}

/// Integrates dY = (Σ_k d^k A_k) Y dt along the polyline, for a state
/// vector or a full matrix of states.
pub fn transport_matrix(
    conn: &Connection,
    y0: &DMatrix<Scalar>,
    path: &[Coordinates],
    stepper: Stepper,
) -> Result<DMatrix<Scalar>> {
    if path.len() < 2 {
        return Err(Error::InvalidParameter("a path needs at least two vertices".into()));
    }
    if stepper.steps_per_segment == 0 {
        return Err(Error::InvalidParameter("steps per segment must be positive".into()));
    }
    if y0.nrows() != conn.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: conn.state_dim(),
            found: y0.nrows(),
        });
    }
    let n = conn.dim();
    for p in path {
        p.check_dim(n)?;
    }
    let mut y = y0.clone();
    for seg in path.windows(2) {
        let (a, b) = (seg[0].as_slice(), seg[1].as_slice());
        let dir: Vec<Scalar> = (0..n).map(|k| b[k] - a[k]).collect();
        let m = stepper.steps_per_segment;
        let dt = 1.0 / m as f64;
        if dir.iter().all(|z| *z == re(0.0)) {
            continue;
        }
        if dir.iter().any(|z| z.norm() * dt == 0.0 && *z != re(0.0)) {
            return Err(Error::InvalidParameter("step size underflow".into()));
        }
        let at = |t: f64| -> Vec<Scalar> { (0..n).map(|k| a[k] + dir[k] * t).collect() };
        for s in 0..m {
            let t = s as f64 * dt;
            let k1 = conn.along(&at(t), &dir)? * &y;
            let mid = conn.along(&at(t + 0.5 * dt), &dir)?;
            let k2 = &mid * (&y + &k1 * re(0.5 * dt));
            let k3 = &mid * (&y + &k2 * re(0.5 * dt));
            let k4 = conn.along(&at(t + dt), &dir)? * (&y + &k3 * re(dt));
            y += (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(dt / 6.0);
        }
    }
    Ok(y)
}

/// Transports `state0` along the polyline.
pub fn transport(
    kind: LaxKind,
    state0: &LaxState,
    path: &[Coordinates],
    data: &SystemInstance,
    stepper: Stepper,
) -> Result<LaxState> {
    state0.check(kind, data.dim())?;
    let conn = Connection::new(kind, data.clone(), state0.lambda);
    let y = transport_matrix(&conn, &state0.to_vector(), path, stepper)?;
    Ok(LaxState::from_vector(&y, data.dim(), state0.lambda))
}

/// A coordinate rectangle spanned by directions i and j from `corner`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    pub corner: Coordinates,
    pub i: usize,
    pub j: usize,
    pub h_i: f64,
    pub h_j: f64,
}

impl Rectangle {
    pub fn new(corner: Coordinates, i: usize, j: usize, h_i: f64, h_j: f64) -> Self {
        Rectangle { corner, i, j, h_i, h_j }
    }

    /// Counter-clockwise boundary: +i, +j, −i, −j.
    pub fn boundary(&self) -> Vec<Coordinates> {
        let c = &self.corner;
        let p1 = c.shifted(self.i, re(self.h_i));
        let p2 = p1.shifted(self.j, re(self.h_j));
        let p3 = c.shifted(self.j, re(self.h_j));
        vec![c.clone(), p1, p2, p3, c.clone()]
    }

    fn check(&self, n: usize) -> Result<()> {
        self.corner.check_dim(n)?;
        if self.i >= n || self.j >= n || self.i == self.j {
            return Err(Error::InvalidParameter(format!(
                "rectangle directions ({}, {}) invalid in dimension {n}",
                self.i, self.j
            )));
        }
        if !(self.h_i > 0.0 && self.h_j > 0.0) {
            return Err(Error::InvalidParameter("rectangle sides must be positive".into()));
        }
        Ok(())
    }
}

/// Round trip of the standard basis around a rectangle.
pub fn monodromy(conn: &Connection, rect: &Rectangle, stepper: Stepper) -> Result<DMatrix<Scalar>> {
    rect.check(conn.dim())?;
    let d = conn.state_dim();
    transport_matrix(conn, &DMatrix::identity(d, d), &rect.boundary(), stepper)
}

fn frobenius(m: &DMatrix<Scalar>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Monodromy defects ‖M − I‖ (Frobenius) at step h and h/2, and of the
/// Richardson combination (16 M(h/2) − M(h))/15.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyDefect {
    #[serde(with = "crate::serde_scalar")]
    pub lambda: Scalar,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

/// Transports the basis around `rect` at spectral parameter λ.
pub fn monodromy_defect(
    kind: LaxKind,
    data: &SystemInstance,
    rect: &Rectangle,
    lambda: Scalar,
    stepper: Stepper,
) -> Result<MonodromyDefect> {
    let conn = Connection::new(kind, data.clone(), lambda);
    let coarse = monodromy(&conn, rect, stepper)?;
    let fine = monodromy(&conn, rect, stepper.halved())?;
    let d = conn.state_dim();
    let id = DMatrix::<Scalar>::identity(d, d);
    let rich = (&fine * re(16.0) - &coarse) / re(15.0);
    Ok(MonodromyDefect {
        lambda,
        coarse: frobenius(&(coarse - &id)),
        fine: frobenius(&(fine - &id)),
        extrapolated: frobenius(&(rich - id)),
    })
}

/// Monodromy defects over a λ sweep, computed in parallel.
pub fn monodromy_sweep(
    kind: LaxKind,
    data: &SystemInstance,
    rect: &Rectangle,
    lambdas: &[Scalar],
    stepper: Stepper,
) -> Result<Vec<MonodromyDefect>> {
    lambdas
        .par_iter()
        .map(|&l| monodromy_defect(kind, data, rect, l, stepper))
        .collect()
}

/// Moves real λ to λ + iδ when some λ + f^i changes sign or comes within
/// δ of zero over the sampled points, so the sweep stays off the cut.
pub fn offset_sweep(lambdas: &[f64], data: &SystemInstance, points: &[Coordinates], delta: f64) -> Vec<Scalar> {
    lambdas
        .iter()
        .map(|&l| {
            let hits = (0..data.dim()).any(|i| {
                let v: Vec<Scalar> = points.iter().map(|p| re(l) + data.pencil.f_at(i, p.as_slice())).collect();
                let near = v.iter().any(|z| z.norm() < delta);
                let crosses = v.iter().any(|z| z.re > 0.0) && v.iter().any(|z| z.re < 0.0);
                near || crosses
            });
            if hits {
                Scalar::new(l, delta)
            } else {
                re(l)
            }
        })
        .collect()
}

fn fd_settings(data: &SystemInstance) -> FiniteDifference {
    if data.dim() >= 2 {
        data.beta.get(0, 1).fd
    } else {
        FiniteDifference::default()
    }
}

fn matrix_partial(conn: &Connection, k: usize, l: usize, u: &[Scalar], fd: FiniteDifference) -> Result<DMatrix<Scalar>> {
    let h = fd.step_at(u, l);
    let at = |t: f64| -> Result<DMatrix<Scalar>> {
        let mut v = u.to_vec();
        v[l] += re(t * h);
        conn.matrix(k, &v)
    };
    match fd.order {
        StencilOrder::Second => Ok((at(1.0)? - at(-1.0)?) / re(2.0 * h)),
        StencilOrder::Fourth => {
            Ok((at(-2.0)? - at(2.0)? + (at(1.0)? - at(-1.0)?) * re(8.0)) / re(12.0 * h))
        }
    }
}

/// max over pairs i < j of the largest entry of ∂_j A_i − ∂_i A_j + [A_i, A_j],
/// with derivatives by finite differences using the settings of β.
pub fn zero_curvature_residual(kind: LaxKind, data: &SystemInstance, point: &Coordinates, lambda: Scalar) -> Result<f64> {
    let u = point.as_slice();
    check_point(data, u)?;
    let conn = Connection::new(kind, data.clone(), lambda);
    let fd = fd_settings(data);
    let a = conn.matrices(u)?;
    let n = data.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r = matrix_partial(&conn, i, j, u, fd)? - matrix_partial(&conn, j, i, u, fd)? + &a[i] * &a[j]
                - &a[j] * &a[i];
            worst = worst.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    Ok(worst)
}
