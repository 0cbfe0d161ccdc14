use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Scalar};
use crate::univariate::Univariate;

/// Eigenvalue functions f^i(u^i) and curvature constants of a pencil
/// g₁ = f·g₂ with K(g₁) = K₁, K(g₂) = K₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilSpec {
    pub f: Vec<Univariate>,
    #[serde(with = "crate::serde_scalar")]
    pub k1: Scalar,
    #[serde(with = "crate::serde_scalar")]
    pub k2: Scalar,
}

impl PencilSpec {
    pub fn new(f: Vec<Univariate>, k1: Scalar, k2: Scalar) -> Self {
        PencilSpec { f, k1, k2 }
    }

    /// Flat pencil with f^i(x) = x.
    pub fn flat_identity(n: usize) -> Self {
        PencilSpec::new(vec![Univariate::identity(); n], re(0.0), re(0.0))
    }

    pub fn constants(c: &[f64], k1: f64, k2: f64) -> Self {
        PencilSpec::new(
            c.iter().map(|&x| Univariate::constant(x)).collect(),
            re(k1),
            re(k2),
        )
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    /// f^i(u^i)
    pub fn f_at(&self, i: usize, u: &[Scalar]) -> Scalar {
        self.f[i].value(u[i])
    }

    /// (f^i)'(u^i)
    pub fn df_at(&self, i: usize, u: &[Scalar]) -> Scalar {
        self.f[i].d1(u[i])
    }

    /// Pairwise distinctness of f^i(u^i) as functions of u. Each f^i is
    /// sampled along its coordinate line; a function that is constant on
    /// the samples is compared by value, and a pair involving a
    /// non-constant function is distinct because it depends on a variable
    /// the other one does not.
    pub fn is_nonsingular(&self, samples: &[Scalar]) -> bool {
        let consts: Vec<Option<Scalar>> = (0..self.dim()).map(|i| self.constant_on(i, samples)).collect();
        for i in 0..consts.len() {
            for j in i + 1..consts.len() {
                if let (Some(a), Some(b)) = (consts[i], consts[j]) {
                    if (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1.0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn constant_on(&self, i: usize, samples: &[Scalar]) -> Option<Scalar> {
        if let Some(c) = self.f[i].as_constant() {
            return Some(c);
        }
        let first = self.f[i].value(*samples.first()?);
        samples
            .iter()
            .all(|&x| {
                let v = self.f[i].value(x);
                (v - first).norm() <= 1e-12 * v.norm().max(first.norm()).max(1.0)
            })
            .then_some(first)
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.dim(),
            });
        }
        Ok(())
    }
}
