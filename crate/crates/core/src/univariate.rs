use serde::{Deserialize, Serialize};

use crate::scalar::{re, Scalar};

/// Named closed-form functions of one variable with analytic first and
/// second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Univariate {
    Constant {
        #[serde(with = "crate::serde_scalar")]
        value: Scalar,
    },
    /// slope·x + offset
    Affine {
        #[serde(with = "crate::serde_scalar")]
        slope: Scalar,
        #[serde(with = "crate::serde_scalar")]
        offset: Scalar,
    },
    /// amplitude·exp(rate·x)
    Exp {
        #[serde(with = "crate::serde_scalar")]
        amplitude: Scalar,
        #[serde(with = "crate::serde_scalar")]
        rate: Scalar,
    },
    /// amplitude·exp(−((x − center)/width)²)
    Gaussian {
        #[serde(with = "crate::serde_scalar")]
        amplitude: Scalar,
        #[serde(with = "crate::serde_scalar")]
        center: Scalar,
        #[serde(with = "crate::serde_scalar")]
        width: Scalar,
    },
    /// amplitude·sin(frequency·x + phase)
    Sin {
        #[serde(with = "crate::serde_scalar")]
        amplitude: Scalar,
        #[serde(with = "crate::serde_scalar")]
        frequency: Scalar,
        #[serde(with = "crate::serde_scalar")]
        phase: Scalar,
    },
    /// Σ c_k x^k
    Polynomial {
        #[serde(with = "crate::serde_scalar::vec")]
        coefficients: Vec<Scalar>,
    },
    Sum {
        terms: Vec<Univariate>,
    },
}

impl Univariate {
    pub fn constant(c: f64) -> Self {
        Univariate::Constant { value: re(c) }
    }

    pub fn identity() -> Self {
        Univariate::affine(1.0, 0.0)
    }

    pub fn affine(slope: f64, offset: f64) -> Self {
        Univariate::Affine {
            slope: re(slope),
            offset: re(offset),
        }
    }

    pub fn exp(amplitude: f64, rate: f64) -> Self {
        Univariate::Exp {
            amplitude: re(amplitude),
            rate: re(rate),
        }
    }

    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        Univariate::Gaussian {
            amplitude: re(amplitude),
            center: re(center),
            width: re(width),
        }
    }

    pub fn sin(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Univariate::Sin {
            amplitude: re(amplitude),
            frequency: re(frequency),
            phase: re(phase),
        }
    }

    pub fn polynomial(coefficients: &[f64]) -> Self {
        Univariate::Polynomial {
            coefficients: coefficients.iter().map(|&c| re(c)).collect(),
        }
    }

    /// Returns (f, f', f'') at x.
    pub fn jet(&self, x: Scalar) -> [Scalar; 3] {
        let zero = re(0.0);
        match self {
            Univariate::Constant { value } => [*value, zero, zero],
            Univariate::Affine { slope, offset } => [slope * x + offset, *slope, zero],
            Univariate::Exp { amplitude, rate } => {
                let e = amplitude * (rate * x).exp();
                [e, rate * e, rate * rate * e]
            }
            Univariate::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (x - center) / width;
                let e = amplitude * (-z * z).exp();
                let d1 = -2.0 * z / width * e;
                let d2 = (4.0 * z * z - 2.0) / (width * width) * e;
                [e, d1, d2]
            }
            Univariate::Sin {
                amplitude,
                frequency,
                phase,
            } => {
                let a = frequency * x + phase;
                let (s, c) = (a.sin(), a.cos());
                [
                    amplitude * s,
                    amplitude * frequency * c,
                    -amplitude * frequency * frequency * s,
                ]
            }
            Univariate::Polynomial { coefficients } => {
                let mut v = [zero, zero, zero];
                for &c in coefficients.iter().rev() {
                    v[2] = v[2] * x + 2.0 * v[1];
                    v[1] = v[1] * x + v[0];
                    v[0] = v[0] * x + c;
                }
                v
            }
            Univariate::Sum { terms } => {
                let mut v = [zero, zero, zero];
                for t in terms {
                    let j = t.jet(x);
                    for k in 0..3 {
                        v[k] += j[k];
                    }
                }
                v
            }
        }
    }

    pub fn value(&self, x: Scalar) -> Scalar {
        self.jet(x)[0]
    }

    pub fn d1(&self, x: Scalar) -> Scalar {
        self.jet(x)[1]
    }

    pub fn d2(&self, x: Scalar) -> Scalar {
        self.jet(x)[2]
    }

    /// The function x ↦ f(x − shift).
    pub fn shifted(&self, shift: Scalar) -> Univariate {
        match self {
            Univariate::Constant { .. } => self.clone(),
            Univariate::Affine { slope, offset } => Univariate::Affine {
                slope: *slope,
                offset: offset - slope * shift,
            },
            Univariate::Exp { amplitude, rate } => Univariate::Exp {
                amplitude: amplitude * (-rate * shift).exp(),
                rate: *rate,
            },
            Univariate::Gaussian {
                amplitude,
                center,
                width,
            } => Univariate::Gaussian {
                amplitude: *amplitude,
                center: center + shift,
                width: *width,
            },
            Univariate::Sin {
                amplitude,
                frequency,
                phase,
            } => Univariate::Sin {
                amplitude: *amplitude,
                frequency: *frequency,
                phase: phase - frequency * shift,
            },
            Univariate::Polynomial { coefficients } => {
                // Horner in the shifted variable: p(x − a) built by
                // repeated multiplication with (x − a).
                let mut out: Vec<Scalar> = Vec::new();
                for &c in coefficients.iter().rev() {
                    let mut next = vec![re(0.0); out.len() + 1];
                    for (k, &o) in out.iter().enumerate() {
                        next[k + 1] += o;
                        next[k] -= o * shift;
                    }
                    next[0] += c;
                    out = next;
                }
                Univariate::Polynomial { coefficients: out }
            }
            Univariate::Sum { terms } => Univariate::Sum {
                terms: terms.iter().map(|t| t.shifted(shift)).collect(),
            },
        }
    }

    /// The constant value, if the function is structurally constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self {
            Univariate::Constant { value } => Some(*value),
            Univariate::Affine { slope, offset } if *slope == re(0.0) => Some(*offset),
            Univariate::Exp { amplitude, rate } if *rate == re(0.0) || *amplitude == re(0.0) => {
                Some(*amplitude * if *rate == re(0.0) { 1.0 } else { 0.0 })
            }
            Univariate::Polynomial { coefficients }
                if coefficients.iter().skip(1).all(|c| *c == re(0.0)) =>
            {
                Some(coefficients.first().copied().unwrap_or(re(0.0)))
            }
            Univariate::Sum { terms } => {
                let mut acc = re(0.0);
                for t in terms {
                    acc += t.as_constant()?;
                }
                Some(acc)
            }
            _ => None,
        }
    }
}
