use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{point_string, re, Scalar};

pub type FieldFn = dyn Fn(&[Scalar]) -> Result<Scalar> + Send + Sync;
pub type PartialFn = dyn Fn(&[Scalar], usize) -> Result<Scalar> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Second,
    Fourth,
}

/// Central finite-difference settings. The actual step in direction k is
/// `step * max(1, |u^k|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
    pub order: StencilOrder,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        FiniteDifference {
            step: 1e-4,
            order: StencilOrder::Second,
        }
    }
}

impl FiniteDifference {
    pub fn second(step: f64) -> Self {
        FiniteDifference {
            step,
            order: StencilOrder::Second,
        }
    }

    pub fn fourth(step: f64) -> Self {
        FiniteDifference {
            step,
            order: StencilOrder::Fourth,
        }
    }

    pub fn step_at(&self, u: &[Scalar], k: usize) -> f64 {
        self.step * u[k].norm().max(1.0)
    }

    /// First derivative of `f` along direction `k`.
    pub fn d1<F>(&self, f: &F, u: &[Scalar], k: usize) -> Result<Scalar>
    where
        F: Fn(&[Scalar]) -> Result<Scalar> + ?Sized,
    {
        let h = self.step_at(u, k);
        let at = |t: f64| -> Result<Scalar> {
            let mut v = u.to_vec();
            v[k] += re(t * h);
            f(&v)
        };
        match self.order {
            StencilOrder::Second => Ok((at(1.0)? - at(-1.0)?) / (2.0 * h)),
            StencilOrder::Fourth => {
                Ok((-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h))
            }
        }
    }

    /// Second derivative of `f` along directions `k` and `l`.
    pub fn d2<F>(&self, f: &F, u: &[Scalar], k: usize, l: usize) -> Result<Scalar>
    where
        F: Fn(&[Scalar]) -> Result<Scalar> + ?Sized,
    {
        let hk = self.step_at(u, k);
        let hl = self.step_at(u, l);
        let at = |a: f64, b: f64| -> Result<Scalar> {
            let mut v = u.to_vec();
            v[k] += re(a * hk);
            v[l] += re(b * hl);
            f(&v)
        };
        if k == l {
            let at1 = |t: f64| -> Result<Scalar> {
                let mut v = u.to_vec();
                v[k] += re(t * hk);
                f(&v)
            };
            return match self.order {
                StencilOrder::Second => {
                    Ok((at1(1.0)? - 2.0 * at1(0.0)? + at1(-1.0)?) / (hk * hk))
                }
                StencilOrder::Fourth => Ok((-at1(2.0)? + 16.0 * at1(1.0)? - 30.0 * at1(0.0)?
                    + 16.0 * at1(-1.0)?
                    - at1(-2.0)?)
                    / (12.0 * hk * hk)),
            };
        }
        match self.order {
            StencilOrder::Second => Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)?
                + at(-1.0, -1.0)?)
                / (4.0 * hk * hl)),
            StencilOrder::Fourth => {
                let c = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];
                let mut acc = Scalar::new(0.0, 0.0);
                for &(a, wa) in &c {
                    for &(b, wb) in &c {
                        acc += wa * wb * at(a, b)?;
                    }
                }
                Ok(acc / (144.0 * hk * hl))
            }
        }
    }
}

/// A complex-valued function of N coordinates with optional analytic
/// first partials.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<FieldFn>,
    partial: Option<Arc<PartialFn>>,
    pub fd: FiniteDifference,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("analytic_partials", &self.partial.is_some())
            .field("fd", &self.fd)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[Scalar]) -> Scalar + Send + Sync + 'static,
    {
        ScalarField {
            eval: Arc::new(move |u| Ok(f(u))),
            partial: None,
            fd: FiniteDifference::default(),
        }
    }

    pub fn try_new<F>(f: F) -> Self
    where
        F: Fn(&[Scalar]) -> Result<Scalar> + Send + Sync + 'static,
    {
        ScalarField {
            eval: Arc::new(f),
            partial: None,
            fd: FiniteDifference::default(),
        }
    }

    pub fn constant(c: Scalar) -> Self {
        ScalarField::new(move |_| c).with_partials(|_, _| Scalar::new(0.0, 0.0))
    }

    pub fn zero() -> Self {
        ScalarField::constant(Scalar::new(0.0, 0.0))
    }

    /// Attaches analytic first partials: `p(u, k)` = ∂f/∂u^k.
    pub fn with_partials<P>(mut self, p: P) -> Self
    where
        P: Fn(&[Scalar], usize) -> Scalar + Send + Sync + 'static,
    {
        self.partial = Some(Arc::new(move |u, k| Ok(p(u, k))));
        self
    }

    /// Attaches fallible analytic first partials.
    pub fn with_try_partials<P>(mut self, p: P) -> Self
    where
        P: Fn(&[Scalar], usize) -> Result<Scalar> + Send + Sync + 'static,
    {
        self.partial = Some(Arc::new(p));
        self
    }

    pub fn with_fd(mut self, fd: FiniteDifference) -> Self {
        self.fd = fd;
        self
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partial.is_some()
    }

    pub fn eval(&self, u: &[Scalar]) -> Result<Scalar> {
        let v = (self.eval)(u)?;
        finite(v, "field value", u)
    }

    pub fn partial(&self, k: usize, u: &[Scalar]) -> Result<Scalar> {
        let v = match &self.partial {
            Some(p) => p(u, k)?,
            None => self.fd.d1(&*self.eval, u, k)?,
        };
        finite(v, "field partial", u)
    }

    /// Central finite difference regardless of analytic partials.
    pub fn fd_partial(&self, k: usize, u: &[Scalar]) -> Result<Scalar> {
        let v = self.fd.d1(&*self.eval, u, k)?;
        finite(v, "field partial", u)
    }

    pub fn second_partial(&self, k: usize, l: usize, u: &[Scalar]) -> Result<Scalar> {
        let v = match &self.partial {
            Some(p) => {
                let pk = |v: &[Scalar]| p(v, k);
                self.fd.d1(&pk, u, l)?
            }
            None => self.fd.d2(&*self.eval, u, k, l)?,
        };
        finite(v, "field second partial", u)
    }

    /// Pointwise composition g(f(u)); partials fall back to finite differences.
    pub fn map<G>(&self, g: G) -> ScalarField
    where
        G: Fn(Scalar) -> Scalar + Send + Sync + 'static,
    {
        let inner = self.clone();
        ScalarField::try_new(move |u| Ok(g(inner.eval(u)?))).with_fd(self.fd)
    }
}

pub(crate) fn finite(v: Scalar, what: &str, u: &[Scalar]) -> Result<Scalar> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
            point: point_string(u),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScalarField {
        ScalarField::new(|u| (u[0] * u[1]).exp() + u[0].sin())
    }

    #[test]
    fn fd_matches_analytic_first_partials() {
        let f = sample();
        let u = [re(0.3), re(-0.7)];
        let d0 = (u[0] * u[1]).exp() * u[1] + u[0].cos();
        let d1 = (u[0] * u[1]).exp() * u[0];
        assert!((f.partial(0, &u).unwrap() - d0).norm() < 1e-8);
        assert!((f.partial(1, &u).unwrap() - d1).norm() < 1e-8);
    }

    #[test]
    fn fourth_order_is_more_accurate() {
        let u = [re(0.3), re(-0.7)];
        let exact = (u[0] * u[1]).exp() * (1.0 + u[0] * u[1]);
        let e2 = (sample().with_fd(FiniteDifference::second(1e-3)).second_partial(0, 1, &u).unwrap()
            - exact)
            .norm();
        let e4 = (sample().with_fd(FiniteDifference::fourth(1e-3)).second_partial(0, 1, &u).unwrap()
            - exact)
            .norm();
        assert!(e4 < e2 / 100.0, "e2={e2} e4={e4}");
    }

    #[test]
    fn pure_second_partial() {
        let f = sample();
        let u = [re(0.3), re(-0.7)];
        let exact = (u[0] * u[1]).exp() * u[1] * u[1] - u[0].sin();
        assert!((f.second_partial(0, 0, &u).unwrap() - exact).norm() < 1e-6);
    }

    #[test]
    fn non_finite_is_an_error() {
        let f = ScalarField::new(|u| 1.0 / u[0]);
        assert!(matches!(
            f.eval(&[re(0.0)]),
            Err(Error::NonFinite { .. })
        ));
    }
}
