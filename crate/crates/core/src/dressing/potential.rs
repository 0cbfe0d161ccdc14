use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_chebyshev;
use crate::scalar::{point_string, re, Scalar};
use crate::special::{darboux_mean_value_jet, Jet2, MEAN_VALUE_NODES};
use crate::univariate::Univariate;

fn default_sign() -> f64 {
    1.0
}

fn default_nodes() -> usize {
    MEAN_VALUE_NODES
}

fn default_true() -> bool {
    true
}

/// Named potentials Φ(x, y) of two variables.
///
/// The reduction families are written in the variables U = −x, V = −y,
/// i.e. U = u^i − s and V = u^j − s′, which is where the eigenvalue
/// functions are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialFamily {
    Zero,
    /// amplitude·exp(−rate_x·x − rate_y·y)
    Exponential {
        #[serde(with = "crate::serde_scalar")]
        amplitude: Scalar,
        rate_x: f64,
        rate_y: f64,
    },
    /// amplitude·exp(−((x − cx)² + (y − cy)²)/width²)
    Gaussian {
        #[serde(with = "crate::serde_scalar")]
        amplitude: Scalar,
        center_x: f64,
        center_y: f64,
        width: f64,
    },
    /// amplitude·(x e^{−y} − y e^{−x}), skew-symmetric.
    SkewExp {
        #[serde(with = "crate::serde_scalar")]
        amplitude: Scalar,
    },
    /// g(x)·h(y)
    Separable { g: Univariate, h: Univariate },
    /// One constant eigenvalue c: P = g(U)/√(σ(f(V) − c)) + h(V), or with
    /// the roles of U and V exchanged when `constant_first` is false.
    ClosedFormF2 {
        g: Univariate,
        h: Univariate,
        f: Univariate,
        #[serde(with = "crate::serde_scalar")]
        c: Scalar,
        #[serde(default = "default_sign")]
        sign: f64,
        #[serde(default = "default_true")]
        constant_first: bool,
    },
    /// Two constant eigenvalues: P = g(U) + h(V).
    ClosedFormF3 { g: Univariate, h: Univariate },
    /// Identity eigenvalues: P(U, V) is the circular mean of ψ at
    /// t = (U + V)/2, r = (U − V)/2, by Gauss–Chebyshev quadrature.
    MeanValue {
        psi: Univariate,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
}

/// Φ and the partials Φ_x, Φ_y, Φ_xy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialJet {
    pub v: Scalar,
    pub x: Scalar,
    pub y: Scalar,
    pub xy: Scalar,
}

impl PotentialJet {
    fn zero() -> Self {
        PotentialJet {
            v: re(0.0),
            x: re(0.0),
            y: re(0.0),
            xy: re(0.0),
        }
    }

    /// From a jet of P(U, V) with U = −x, V = −y.
    fn from_uv(j: Jet2) -> Self {
        PotentialJet {
            v: j.v,
            x: -j.da,
            y: -j.db,
            xy: j.dab,
        }
    }

    fn swapped(self) -> Self {
        PotentialJet {
            v: self.v,
            x: self.y,
            y: self.x,
            xy: self.xy,
        }
    }
}

/// A potential family with precomputed quadrature nodes.
#[derive(Debug, Clone)]
pub struct Potential {
    pub family: PotentialFamily,
    cheb: Vec<f64>,
}

impl Potential {
    pub fn new(family: PotentialFamily) -> Result<Self> {
        let cheb = match &family {
            PotentialFamily::MeanValue { nodes, .. } => {
                if *nodes == 0 {
                    return Err(Error::InvalidParameter("mean-value potential needs nodes > 0".into()));
                }
                gauss_chebyshev(*nodes)
            }
            PotentialFamily::Gaussian { width, .. } if !(*width > 0.0) => {
                return Err(Error::InvalidParameter(format!("Gaussian width must be positive, got {width}")));
            }
            PotentialFamily::ClosedFormF2 { sign, .. } if sign.abs() != 1.0 => {
                return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
            }
            _ => Vec::new(),
        };
        Ok(Potential { family, cheb })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, PotentialFamily::Zero)
    }

    pub fn eval(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        Ok(self.jet(x, y)?.v)
    }

    pub fn jet(&self, x: Scalar, y: Scalar) -> Result<PotentialJet> {
        let j = match &self.family {
            PotentialFamily::Zero => PotentialJet::zero(),
            PotentialFamily::Exponential {
                amplitude,
                rate_x,
                rate_y,
            } => {
                let v = amplitude * (-*rate_x * x - *rate_y * y).exp();
                PotentialJet {
                    v,
                    x: -*rate_x * v,
                    y: -*rate_y * v,
                    xy: rate_x * rate_y * v,
                }
            }
            PotentialFamily::Gaussian {
                amplitude,
                center_x,
                center_y,
                width,
            } => {
                let (dx, dy) = (x - center_x, y - center_y);
                let w2 = width * width;
                let v = amplitude * (-(dx * dx + dy * dy) / w2).exp();
                let (gx, gy) = (-2.0 * dx / w2, -2.0 * dy / w2);
                PotentialJet {
                    v,
                    x: gx * v,
                    y: gy * v,
                    xy: gx * gy * v,
                }
            }
            PotentialFamily::SkewExp { amplitude } => {
                let (ex, ey) = ((-x).exp(), (-y).exp());
                PotentialJet {
                    v: amplitude * (x * ey - y * ex),
                    x: amplitude * (ey + y * ex),
                    y: amplitude * (-x * ey - ex),
                    xy: amplitude * (-ey + ex),
                }
            }
            PotentialFamily::Separable { g, h } => {
                let [g0, g1, _] = g.jet(x);
                let [h0, h1, _] = h.jet(y);
                PotentialJet {
                    v: g0 * h0,
                    x: g1 * h0,
                    y: g0 * h1,
                    xy: g1 * h1,
                }
            }
            PotentialFamily::ClosedFormF2 {
                g,
                h,
                f,
                c,
                sign,
                constant_first,
            } => {
                let (u, v) = if *constant_first { (-x, -y) } else { (-y, -x) };
                let [g0, g1, _] = g.jet(u);
                let [h0, h1, _] = h.jet(v);
                let [f0, f1, _] = f.jet(v);
                let w = *sign * (f0 - c);
                if w == re(0.0) {
                    return Err(Error::BranchCrossing {
                        index: usize::from(*constant_first),
                        at: point_string(&[x, y]),
                    });
                }
                let m1 = 1.0 / w.sqrt();
                let m3 = m1 / w;
                let dw = *sign * f1;
                let jet = Jet2 {
                    v: g0 * m1 + h0,
                    da: g1 * m1,
                    db: -0.5 * g0 * m3 * dw + h1,
                    daa: re(0.0),
                    dab: -0.5 * g1 * m3 * dw,
                    dbb: re(0.0),
                };
                let pj = PotentialJet::from_uv(jet);
                if *constant_first {
                    pj
                } else {
                    pj.swapped()
                }
            }
            PotentialFamily::ClosedFormF3 { g, h } => {
                let [g0, g1, _] = g.jet(-x);
                let [h0, h1, _] = h.jet(-y);
                PotentialJet {
                    v: g0 + h0,
                    x: -g1,
                    y: -h1,
                    xy: re(0.0),
                }
            }
            PotentialFamily::MeanValue { psi, .. } => {
                let (u, v) = (-x, -y);
                let m = darboux_mean_value_jet(psi, 0.5 * (u + v), 0.5 * (u - v), &self.cheb);
                let jet = Jet2 {
                    v: m.v,
                    da: 0.5 * (m.da + m.db),
                    db: 0.5 * (m.da - m.db),
                    daa: re(0.0),
                    dab: 0.25 * (m.daa - m.dbb),
                    dbb: re(0.0),
                };
                PotentialJet::from_uv(jet)
            }
        };
        for (what, z) in [("potential", j.v), ("potential partial", j.x), ("potential partial", j.y), ("potential partial", j.xy)] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite {
                    what: what.into(),
                    point: point_string(&[x, y]),
                });
            }
        }
        Ok(j)
    }
}

/// One entry Φ_ij of the potential matrix, i ≤ j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialEntry {
    pub i: usize,
    pub j: usize,
    #[serde(flatten)]
    pub family: PotentialFamily,
}

/// The upper triangle Φ_ij, i ≤ j; missing entries are zero. Diagonal
/// entries must be skew-symmetric.
#[derive(Debug, Clone)]
pub struct Potentials {
    n: usize,
    table: Vec<Potential>,
}

const SKEW_PROBES: [(f64, f64); 4] = [(0.3, -0.7), (1.1, 0.2), (-0.4, -1.3), (2.0, 0.5)];

impl Potentials {
    pub fn zero(n: usize) -> Self {
        Potentials {
            n,
            table: (0..n * n).map(|_| Potential::new(PotentialFamily::Zero).unwrap()).collect(),
        }
    }

    pub fn new(n: usize, entries: &[PotentialEntry]) -> Result<Self> {
        let mut p = Potentials::zero(n);
        let mut seen = vec![false; n * n];
        for e in entries {
            if e.i > e.j || e.j >= n {
                return Err(Error::InvalidParameter(format!(
                    "potential index ({}, {}) must satisfy i <= j < {n}",
                    e.i, e.j
                )));
            }
            if std::mem::replace(&mut seen[e.i * n + e.j], true) {
                return Err(Error::InvalidParameter(format!("duplicate potential ({}, {})", e.i, e.j)));
            }
            let pot = Potential::new(e.family.clone())?;
            if e.i == e.j {
                check_skew(&pot, e.i)?;
            }
            p.table[e.i * n + e.j] = pot;
        }
        Ok(p)
    }

    /// Convenience constructor for N = 2 with a single off-diagonal entry.
    pub fn pair(family: PotentialFamily) -> Result<Self> {
        Potentials::new(2, &[PotentialEntry { i: 0, j: 1, family }])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Φ_ij for i ≤ j.
    pub fn get(&self, i: usize, j: usize) -> &Potential {
        assert!(i <= j, "potentials are stored for i <= j");
        &self.table[i * self.n + j]
    }

    pub fn entries(&self) -> Vec<(usize, usize, &Potential)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let p = self.get(i, j);
                if !p.is_zero() {
                    out.push((i, j, p));
                }
            }
        }
        out
    }
}

fn check_skew(p: &Potential, i: usize) -> Result<()> {
    for &(a, b) in &SKEW_PROBES {
        let (x, y) = (re(a), re(b));
        let v1 = p.eval(x, y)?;
        let v2 = p.eval(y, x)?;
        if (v1 + v2).norm() > 1e-12 * v1.norm().max(v2.norm()).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "diagonal potential ({i}, {i}) is not skew-symmetric: Φ(x,y) + Φ(y,x) = {} at ({a}, {b})",
                v1 + v2
            )));
        }
    }
    Ok(())
}
