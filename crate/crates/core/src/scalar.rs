use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

pub type Scalar = Complex64;

#[inline]
pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// A point u = (u^1, ..., u^N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coordinates(pub Vec<Scalar>);

impl Coordinates {
    pub fn new(u: Vec<Scalar>) -> Self {
        Coordinates(u)
    }

    pub fn real(u: &[f64]) -> Self {
        Coordinates(u.iter().map(|&x| re(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.0
    }

    pub fn shifted(&self, k: usize, h: Scalar) -> Self {
        let mut v = self.0.clone();
        v[k] += h;
        Coordinates(v)
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

impl fmt::Display for Coordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, z) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            fmt_scalar(f, *z)?;
        }
        write!(f, ")")
    }
}

pub(crate) fn fmt_scalar(f: &mut fmt::Formatter<'_>, z: Scalar) -> fmt::Result {
    if z.im == 0.0 {
        write!(f, "{}", z.re)
    } else {
        write!(f, "{}{:+}i", z.re, z.im)
    }
}

pub(crate) fn point_string(u: &[Scalar]) -> String {
    Coordinates(u.to_vec()).to_string()
}

/// Signature flag ε = ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn scalar(self) -> Scalar {
        re(self.value())
    }

    pub fn from_f64(x: f64) -> Result<Sign> {
        if x == 1.0 {
            Ok(Sign::Plus)
        } else if x == -1.0 {
            Ok(Sign::Minus)
        } else {
            Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {x}")))
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Arithmetic mode for square roots of signed quantities.
///
/// `Real` demands that the radicand is a positive real number and reports
/// an error otherwise; `Complex` takes the principal branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    Real,
    #[default]
    Complex,
}

/// Relative tolerance used to decide whether a complex number is real.
pub(crate) const REAL_TOL: f64 = 1e-12;

pub(crate) fn is_positive_real(z: Scalar) -> bool {
    z.re > 0.0 && z.im.abs() <= REAL_TOL * z.re.abs().max(1.0)
}
