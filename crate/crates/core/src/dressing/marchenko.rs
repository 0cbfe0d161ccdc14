use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::Discretization;
use crate::scalar::{re, Scalar};

use super::kernel::{check_decay, DecayBound, Kernel};

/// Systems with a 1-norm condition estimate above this are rejected.
pub const CONDITION_THRESHOLD: f64 = 1e12;

/// Solution K_il(s, q_n) of the truncated integral equation at the nodes.
#[derive(Debug, Clone)]
pub struct ResolventKernel {
    pub n: usize,
    pub s: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row i, column l·M + m holds K_il(s, q_m).
    pub values: DMatrix<Scalar>,
    /// 1-norm condition number of the Nyström matrix.
    pub condition: f64,
    /// max |K(I − WF) − F_s| / max |F_s|.
    pub residual: f64,
    pub decay: DecayBound,
}

/// F_lj(q_n, q_m) weighted by w_n, as the (N·M)×(N·M) block matrix B.
fn weighted_block(kernel: &dyn Kernel, disc: &Discretization) -> Result<DMatrix<Scalar>> {
    let n = kernel.dim();
    let m = disc.len();
    let mut b = DMatrix::from_element(n * m, n * m, re(0.0));
    for l in 0..n {
        for j in 0..n {
            for (a, &qa) in disc.nodes.iter().enumerate() {
                let w = disc.weights[a];
                for (c, &qc) in disc.nodes.iter().enumerate() {
                    b[(l * m + a, j * m + c)] = w * kernel.eval(l, j, qa, qc)?;
                }
            }
        }
    }
    Ok(b)
}

/// F_ij(s, q_m) as an N×(N·M) matrix.
fn source_rows(kernel: &dyn Kernel, disc: &Discretization) -> Result<DMatrix<Scalar>> {
    let n = kernel.dim();
    let m = disc.len();
    let mut f = DMatrix::from_element(n, n * m, re(0.0));
    for i in 0..n {
        for j in 0..n {
            for (c, &qc) in disc.nodes.iter().enumerate() {
                f[(i, j * m + c)] = kernel.eval(i, j, disc.s, qc)?;
            }
        }
    }
    Ok(f)
}

fn max_abs(m: &DMatrix<Scalar>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn norm1(m: &DMatrix<Scalar>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Nyström solution of K = F + ∫_s K F on the nodes of `disc`, which
/// starts at s. The decay of F at the truncation point is checked first.
pub fn solve_marchenko(kernel: &dyn Kernel, disc: &Discretization) -> Result<ResolventKernel> {
    let decay = check_decay(kernel, disc)?;
    let n = kernel.dim();
    let m = disc.len();
    let b = weighted_block(kernel, disc)?;
    let fs = source_rows(kernel, disc)?;
    let a = DMatrix::<Scalar>::identity(n * m, n * m) - &b;
    let at = a.transpose();
    let lu = at.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::SingularSystem)?;
    let condition = norm1(&a) * norm1(&inv.transpose());
    if !condition.is_finite() || condition > CONDITION_THRESHOLD {
        return Err(Error::IllConditioned {
            condition,
            threshold: CONDITION_THRESHOLD,
        });
    }
    // X A = F_s  ⇔  Aᵀ Xᵀ = F_sᵀ
    let xt = at.lu().solve(&fs.transpose()).ok_or(Error::SingularSystem)?;
    let values = xt.transpose();
    let scale = max_abs(&fs);
    let residual = if scale > 0.0 {
        max_abs(&(&values * &a - &fs)) / scale
    } else {
        max_abs(&values)
    };
    Ok(ResolventKernel {
        n,
        s: disc.s,
        nodes: disc.nodes.clone(),
        weights: disc.weights.clone(),
        values,
        condition,
        residual,
        decay,
    })
}

impl ResolventKernel {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// K_il(s, q_m) at node index m.
    pub fn at_node(&self, i: usize, l: usize, m: usize) -> Scalar {
        self.values[(i, l * self.len() + m)]
    }

    /// K_ij(s, x) off the nodes by Nyström interpolation:
    /// F_ij(s, x) + Σ_{l,n} w_n K_il(s, q_n) F_lj(q_n, x).
    pub fn eval(&self, kernel: &dyn Kernel, i: usize, j: usize, x: f64) -> Result<Scalar> {
        let mut v = kernel.eval(i, j, self.s, x)?;
        for l in 0..self.n {
            for (a, (&q, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
                let k = self.at_node(i, l, a);
                if k != re(0.0) {
                    v += w * k * kernel.eval(l, j, q, x)?;
                }
            }
        }
        Ok(v)
    }
}

/// β_ij(s) = K_ji(s, s).
pub fn beta_from_kernel(resolvent: &ResolventKernel, kernel: &dyn Kernel) -> Result<Vec<Vec<Scalar>>> {
    let n = resolvent.n;
    let mut b = vec![vec![re(0.0); n]; n];
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i != j {
                *v = resolvent.eval(kernel, j, i, resolvent.s)?;
            }
        }
    }
    Ok(b)
}

/// The first `terms` Neumann terms F, F∘F, F∘F∘F, … evaluated at the nodes
/// in the layout of `ResolventKernel::values`.
pub fn neumann_terms(kernel: &dyn Kernel, disc: &Discretization, terms: usize) -> Result<Vec<DMatrix<Scalar>>> {
    let b = weighted_block(kernel, disc)?;
    let mut t = source_rows(kernel, disc)?;
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let next = &t * &b;
        out.push(t);
        t = next;
    }
    Ok(out)
}
