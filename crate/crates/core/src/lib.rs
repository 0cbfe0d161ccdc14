//! Numerical laboratory for pencils of diagonal constant-curvature metrics.
//!
//! The crate computes curvature of diagonal metrics, evaluates the
//! Lamé-type system with its pencil reduction, builds solutions by the
//! Zakharov dressing method and certifies them with Lax-pair monodromy.

pub mod dressing;
pub mod error;
pub mod field;
pub mod frames;
pub mod grid;
pub mod lame;
pub mod lax;
pub mod metric;
pub mod pencil;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod serde_scalar;
pub mod special;
pub mod univariate;

pub use error::{Error, Result};
pub use field::{FiniteDifference, ScalarField, StencilOrder};
pub use dressing::{Dressing, DressingConfig, Potentials};
pub use frames::FrameFamily;
pub use grid::Grid;
pub use lax::{Connection, LaxKind, LaxState, MonodromyDefect, Rectangle, Stepper};
pub use lame::{RotationCoefficients, ScaledFrame, SystemInstance};
pub use metric::{CurvatureComponents, DiagonalMetric, LameFrame};
pub use pencil::PencilSpec;
pub use quadrature::{Discretization, DiscretizationSpec};
pub use report::{FamilyResidual, ResidualReport};
pub use scalar::{re, Coordinates, Mode, Scalar, Sign};
pub use univariate::Univariate;
