//! Closed-form Lamé frames used as reference data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::metric::LameFrame;
use crate::scalar::{re, Scalar, Sign};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FrameFamily {
    /// H_i ≡ 1.
    Euclidean { dimension: usize },
    /// H₁ = R, H₂ = R sin u¹; curvature 1/R².
    Sphere { radius: f64 },
    /// Spherical coordinates in R³: H₁ = 1, H₂ = u¹, H₃ = u¹ sin u².
    SphericalR3,
    /// Polar coordinates in the plane: H₁ = 1, H₂ = u¹.
    Polar,
    /// H₁ = H₂ = exp(u¹ + u²); flat, β₁₂ = β₂₁ = 1.
    ExpConformal,
    /// H₁ = H₂ = 1/(u¹ + u²); curvature −2.
    Hyperbolic,
}

fn field(f: fn(&[Scalar]) -> Scalar, d: fn(&[Scalar], usize) -> Scalar) -> ScalarField {
    ScalarField::new(f).with_partials(d)
}

impl FrameFamily {
    pub fn dimension(&self) -> usize {
        match self {
            FrameFamily::Euclidean { dimension } => *dimension,
            FrameFamily::SphericalR3 => 3,
            _ => 2,
        }
    }

    /// Curvature of the metric Σ H_i² (du^i)².
    pub fn curvature(&self) -> f64 {
        match self {
            FrameFamily::Sphere { radius } => 1.0 / (radius * radius),
            FrameFamily::Hyperbolic => -2.0,
            _ => 0.0,
        }
    }

    pub fn build(&self) -> Result<LameFrame> {
        let n = self.dimension();
        let eps = vec![Sign::Plus; n];
        let h: Vec<ScalarField> = match self {
            FrameFamily::Euclidean { dimension } => {
                if *dimension < 2 {
                    return Err(Error::InvalidParameter("dimension must be at least 2".into()));
                }
                (0..*dimension).map(|_| ScalarField::constant(re(1.0))).collect()
            }
            FrameFamily::Sphere { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidParameter(format!("sphere radius {radius}")));
                }
                let r = *radius;
                vec![
                    ScalarField::constant(re(r)),
                    ScalarField::new(move |u| r * u[0].sin()).with_partials(move |u, k| {
                        if k == 0 {
                            r * u[0].cos()
                        } else {
                            re(0.0)
                        }
                    }),
                ]
            }
            FrameFamily::SphericalR3 => vec![
                ScalarField::constant(re(1.0)),
                field(|u| u[0], |_, k| re(if k == 0 { 1.0 } else { 0.0 })),
                field(
                    |u| u[0] * u[1].sin(),
                    |u, k| match k {
                        0 => u[1].sin(),
                        1 => u[0] * u[1].cos(),
                        _ => re(0.0),
                    },
                ),
            ],
            FrameFamily::Polar => vec![
                ScalarField::constant(re(1.0)),
                field(|u| u[0], |_, k| re(if k == 0 { 1.0 } else { 0.0 })),
            ],
            FrameFamily::ExpConformal => (0..2)
                .map(|_| field(|u| (u[0] + u[1]).exp(), |u, _| (u[0] + u[1]).exp()))
                .collect(),
            FrameFamily::Hyperbolic => (0..2)
                .map(|_| field(|u| 1.0 / (u[0] + u[1]), |u, _| -1.0 / ((u[0] + u[1]) * (u[0] + u[1]))))
                .collect(),
        };
        LameFrame::new(h, eps)
    }
}
