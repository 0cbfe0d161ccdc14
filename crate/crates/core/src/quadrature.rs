use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1], nodes increasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// (P_n(z), P_n'(z)) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Chebyshev (first kind) nodes x_k = cos((2k−1)π/(2M)); all weights
/// equal π/M for the weight 1/√(1−x²).
pub fn gauss_chebyshev(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos())
        .collect()
}

/// Placement of panel edges on [s, s_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    /// First panel [s, s + first], remaining edges geometric up to s_max.
    Geometric { first: f64 },
}

/// Parameters of the truncated ray [s, s_max] and its composite rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    /// Truncation length: s_max = s + length.
    pub length: f64,
    pub panels: usize,
    pub per_panel: usize,
    #[serde(default = "default_grading")]
    pub grading: Grading,
    #[serde(default = "default_trunc_tol")]
    pub trunc_tol: f64,
}

fn default_grading() -> Grading {
    Grading::Uniform
}

fn default_trunc_tol() -> f64 {
    1e-8
}

impl DiscretizationSpec {
    pub fn uniform(length: f64, panels: usize, per_panel: usize) -> Self {
        DiscretizationSpec {
            length,
            panels,
            per_panel,
            grading: Grading::Uniform,
            trunc_tol: default_trunc_tol(),
        }
    }

    pub fn geometric(first: f64, length: f64, panels: usize, per_panel: usize) -> Self {
        DiscretizationSpec {
            grading: Grading::Geometric { first },
            ..DiscretizationSpec::uniform(length, panels, per_panel)
        }
    }

    pub fn with_trunc_tol(mut self, tol: f64) -> Self {
        self.trunc_tol = tol;
        self
    }

    pub fn node_count(&self) -> usize {
        self.panels * self.per_panel
    }

    /// Panel edges as offsets from s.
    fn offsets(&self) -> Result<Vec<f64>> {
        let n = self.panels;
        match self.grading {
            Grading::Uniform => Ok((0..=n).map(|k| self.length * k as f64 / n as f64).collect()),
            Grading::Geometric { first } => {
                if !(first > 0.0 && first < self.length) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric grading needs 0 < first < length, got first = {first}"
                    )));
                }
                let mut e = vec![0.0];
                if n == 1 {
                    e.push(self.length);
                } else {
                    let ratio = (self.length / first).powf(1.0 / (n - 1) as f64);
                    for k in 0..n {
                        e.push(first * ratio.powi(k as i32));
                    }
                    e[n] = self.length;
                }
                Ok(e)
            }
        }
    }

    /// Composite Gauss–Legendre rule on [s, s + length].
    pub fn build(&self, s: f64) -> Result<Discretization> {
        if !(self.length > 0.0) || !self.length.is_finite() || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation length must be positive and finite, got {}",
                self.length
            )));
        }
        if self.panels == 0 || self.per_panel == 0 {
            return Err(Error::InvalidParameter("panel and node counts must be positive".into()));
        }
        let edges: Vec<f64> = self.offsets()?.into_iter().map(|o| s + o).collect();
        let (x, w) = gauss_legendre(self.per_panel);
        let mut nodes = Vec::with_capacity(self.node_count());
        let mut weights = Vec::with_capacity(self.node_count());
        for p in edges.windows(2) {
            let (a, b) = (p[0], p[1]);
            let half = 0.5 * (b - a);
            for (xk, wk) in x.iter().zip(&w) {
                nodes.push(0.5 * (a + b) + half * xk);
                weights.push(half * wk);
            }
        }
        let d = Discretization {
            s,
            s_max: s + self.length,
            nodes,
            weights,
            trunc_tol: self.trunc_tol,
        };
        d.validate()?;
        Ok(d)
    }
}

/// Nodes and weights of the truncated integral over [s, s_max].
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub s: f64,
    pub s_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub trunc_tol: f64,
}

impl Discretization {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter("quadrature weights must be positive".into()));
        }
        if self.nodes.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidParameter("quadrature nodes must increase strictly".into()));
        }
        Ok(())
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&q, &w)| w * f(q)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 8, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_rule_integrates_exponential() {
        let d = DiscretizationSpec::geometric(0.5, 40.0, 10, 8).build(1.0).unwrap();
        assert_eq!(d.len(), 80);
        let got = d.integrate(|q| (-(q - 1.0)).exp());
        assert!((got - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
        let u = DiscretizationSpec::uniform(2.0, 3, 4).build(0.0).unwrap();
        assert!((u.integrate(|q| q * q) - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(DiscretizationSpec::uniform(-1.0, 2, 2).build(0.0).is_err());
        assert!(DiscretizationSpec::uniform(1.0, 0, 2).build(0.0).is_err());
        assert!(DiscretizationSpec::geometric(2.0, 1.0, 3, 2).build(0.0).is_err());
    }

    #[test]
    fn chebyshev_nodes_integrate_even_moments() {
        let x = gauss_chebyshev(8);
        let m2: f64 = x.iter().map(|x| x * x).sum::<f64>() * std::f64::consts::PI / 8.0;
        assert!((m2 - std::f64::consts::PI / 2.0).abs() < 1e-14);
    }
}
