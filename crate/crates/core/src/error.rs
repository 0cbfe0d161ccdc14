use thiserror::Error;

/// Errors raised by the numerical operations.
///
/// Points are carried as preformatted strings so that the error stays
/// `Send + Sync + Clone` regardless of the scalar type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate metric: component {component} vanishes at {point}")]
    DegenerateMetric { component: usize, point: String },

    #[error("zero Lame coefficient H_{index} at {point}")]
    ZeroLameCoefficient { index: usize, point: String },

    #[error("non-finite value of {what} at {point}")]
    NonFinite { what: String, point: String },

    #[error("eigenvalue collision f^{i} = f^{j} at {point}")]
    EigenvalueCollision { i: usize, j: usize, point: String },

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid sign for square root of eps*f in component {index} at {point}")]
    InvalidSign { index: usize, point: String },

    #[error("branch crossing of f^{index} on the integration ray near {at}")]
    BranchCrossing { index: usize, at: String },

    #[error("singular spectral point: lambda + f^{index} = 0 at {point}")]
    SingularSpectralPoint { index: usize, point: String },

    #[error("ill-conditioned system: condition estimate {condition:.3e} exceeds {threshold:.1e}")]
    IllConditioned { condition: f64, threshold: f64 },

    #[error("kernel decay bound violated: |F| = {observed:.3e} at truncation exceeds {tolerance:.1e}")]
    DecayViolated { observed: f64, tolerance: f64 },

    #[error("singular linear system")]
    SingularSystem,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample set")]
    EmptySamples,
}

pub type Result<T> = std::result::Result<T, Error>;
