use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pencil::PencilSpec;
use crate::quadrature::Discretization;
use crate::report::ResidualReport;
use crate::scalar::{point_string, re, Coordinates, Scalar};

use super::potential::Potentials;

/// Matrix kernel F_ij(s, s′) at a fixed point u.
pub trait Kernel: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, i: usize, j: usize, s: f64, s_prime: f64) -> Result<Scalar>;
}

/// F assembled from potentials:
/// F_ij(s, s′) = Φ_ij,x(s − u^i, s′ − u^j) for i < j,
/// F_ij(s, s′) = −Φ_ji,y(s′ − u^j, s − u^i) for i > j,
/// F_ii(s, s′) = Φ_ii,x(s − u^i, s′ − u^i).
#[derive(Debug, Clone)]
pub struct AssembledKernel {
    pub potentials: Arc<Potentials>,
    pub u: Vec<Scalar>,
}

pub fn assemble_f(potentials: Arc<Potentials>, u: &Coordinates) -> Result<AssembledKernel> {
    u.check_dim(potentials.dim())?;
    Ok(AssembledKernel {
        potentials,
        u: u.0.clone(),
    })
}

impl Kernel for AssembledKernel {
    fn dim(&self) -> usize {
        self.potentials.dim()
    }

    fn eval(&self, i: usize, j: usize, s: f64, sp: f64) -> Result<Scalar> {
        let (a, b) = (re(s), re(sp));
        if i <= j {
            let p = self.potentials.get(i, j);
            if p.is_zero() {
                return Ok(re(0.0));
            }
            Ok(p.jet(a - self.u[i], b - self.u[j])?.x)
        } else {
            let p = self.potentials.get(j, i);
            if p.is_zero() {
                return Ok(re(0.0));
            }
            Ok(-p.jet(b - self.u[j], a - self.u[i])?.y)
        }
    }
}

type KernelFn = dyn Fn(usize, usize, f64, f64) -> Scalar + Send + Sync;

/// A kernel given directly as a closure, not necessarily assembled from
/// potentials.
#[derive(Clone)]
pub struct FnKernel {
    n: usize,
    f: Arc<KernelFn>,
}

impl FnKernel {
    pub fn new<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize, f64, f64) -> Scalar + Send + Sync + 'static,
    {
        FnKernel { n, f: Arc::new(f) }
    }
}

impl Kernel for FnKernel {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, i: usize, j: usize, s: f64, sp: f64) -> Result<Scalar> {
        let v = (self.f)(i, j, s, sp);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                what: format!("kernel F_{i}{j}"),
                point: format!("(s, s') = ({s}, {sp})"),
            })
        }
    }
}

/// F̃_ij(s, s′) = √f^j(u^j − s′) / √f^i(u^i − s) · F_ij(s, s′), principal
/// branch.
pub struct ScaledKernel<K> {
    pub base: K,
    pub pencil: PencilSpec,
    pub u: Vec<Scalar>,
}

impl<K: Kernel> ScaledKernel<K> {
    pub fn new(base: K, pencil: PencilSpec, u: &Coordinates) -> Result<Self> {
        u.check_dim(base.dim())?;
        pencil.check_dim(base.dim())?;
        Ok(ScaledKernel {
            base,
            pencil,
            u: u.0.clone(),
        })
    }

    /// √f^i(u^i − x).
    pub fn weight(&self, i: usize, x: f64) -> Scalar {
        self.pencil.f[i].value(self.u[i] - x).sqrt()
    }
}

impl<K: Kernel> Kernel for ScaledKernel<K> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, i: usize, j: usize, s: f64, sp: f64) -> Result<Scalar> {
        let den = self.weight(i, s);
        if den == re(0.0) {
            return Err(Error::BranchCrossing {
                index: i,
                at: format!("s = {s}"),
            });
        }
        Ok(self.weight(j, sp) / den * self.base.eval(i, j, s, sp)?)
    }
}

/// Sample of kernel arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub s: f64,
    pub s_prime: f64,
}

fn d_arg<F: Fn(f64) -> Result<Scalar>>(f: F, x: f64, h: f64) -> Result<Scalar> {
    Ok((-f(x + 2.0 * h)? + 8.0 * f(x + h)? - 8.0 * f(x - h)? + f(x - 2.0 * h)?) / (12.0 * h))
}

/// max |∂F_ij(s, s′)/∂s′ + ∂F_ji(s′, s)/∂s| over samples and index pairs,
/// by fourth-order differences.
pub fn zakharov_relation_residual(kernel: &dyn Kernel, samples: &[KernelSample], tol: f64) -> Result<ResidualReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = kernel.dim();
    let mut entries = Vec::with_capacity(samples.len());
    for smp in samples {
        let (s, sp) = (smp.s, smp.s_prime);
        let h = 1e-3 * s.abs().max(sp.abs()).max(1.0);
        let mut list = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let a = d_arg(|x| kernel.eval(i, j, s, x), sp, h)?;
                let b = d_arg(|x| kernel.eval(j, i, sp, x), s, h)?;
                list.push((a + b).norm());
            }
        }
        entries.push(list);
    }
    let points = samples
        .iter()
        .map(|k| Coordinates::real(&[k.s, k.s_prime]))
        .collect();
    let mut rep = ResidualReport::new("Zakharov relation", format!("{} (s, s') samples", samples.len()), points, tol);
    rep.add_family("za1", &entries);
    Ok(rep)
}

/// Exponential envelope |F| ≤ A·exp(−α(q − s)) fitted on the nodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecayBound {
    pub amplitude: f64,
    pub rate: f64,
    /// max |F_lj(s_max, q)| over l, j and nodes q.
    pub at_truncation: f64,
}

/// Samples the kernel's first argument along the nodes and at s_max; fails
/// when |F(s_max, ·)| exceeds the truncation tolerance.
pub fn check_decay(kernel: &dyn Kernel, disc: &Discretization) -> Result<DecayBound> {
    let n = kernel.dim();
    let envelope = |q: f64| -> Result<f64> {
        let mut m = 0.0f64;
        for l in 0..n {
            for j in 0..n {
                for &x in &disc.nodes {
                    m = m.max(kernel.eval(l, j, q, x)?.norm());
                }
            }
        }
        Ok(m)
    };
    let at_truncation = envelope(disc.s_max)?;
    // Fit log envelope on a thinned set of nodes.
    let stride = (disc.len() / 16).max(1);
    let mut pts = Vec::new();
    for q in disc.nodes.iter().step_by(stride).copied().chain(std::iter::once(disc.s_max)) {
        let e = if q == disc.s_max { at_truncation } else { envelope(q)? };
        if e > 0.0 {
            pts.push((q - disc.s, e));
        }
    }
    let (amplitude, rate) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
        let rate = if sxx > 0.0 { -(sxy / sxx) } else { 0.0 };
        let amp = pts.iter().map(|p| p.1 * (rate * p.0).exp()).fold(0.0, f64::max);
        (amp, rate)
    } else {
        (pts.first().map_or(0.0, |p| p.1), 0.0)
    };
    if !(at_truncation <= disc.trunc_tol) {
        return Err(Error::DecayViolated {
            observed: at_truncation,
            tolerance: disc.trunc_tol,
        });
    }
    Ok(DecayBound {
        amplitude,
        rate,
        at_truncation,
    })
}

/// Rejects rays on which some f^i(u^i − x) vanishes or crosses the negative
/// real axis, where the principal square root jumps.
pub fn check_branch(pencil: &PencilSpec, u: &Coordinates, xs: &[f64]) -> Result<()> {
    for i in 0..pencil.dim() {
        let vals: Vec<Scalar> = xs.iter().map(|&x| pencil.f[i].value(u.0[i] - x)).collect();
        for (k, v) in vals.iter().enumerate() {
            if v.norm() <= 1e-14 {
                return Err(Error::BranchCrossing {
                    index: i,
                    at: format!("x = {} (u = {})", xs[k], point_string(&u.0)),
                });
            }
        }
        for (k, w) in vals.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let crosses_cut = a.re < 0.0 && b.re < 0.0 && a.im * b.im < 0.0;
            let through_zero = a.re * b.re < 0.0 && a.im.abs() + b.im.abs() <= 1e-12 * (a.norm() + b.norm());
            if crosses_cut || through_zero {
                return Err(Error::BranchCrossing {
                    index: i,
                    at: format!("x in [{}, {}] (u = {})", xs[k], xs[k + 1], point_string(&u.0)),
                });
            }
        }
    }
    Ok(())
}
