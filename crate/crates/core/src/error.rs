use thiserror::Error;

pub type Result<T> = std::result::Result<T, QdError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QdError {
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error(
        "quadrature budget of {subdivisions} subdivisions exhausted \
         (best estimate {estimate}, error bound {error_bound})"
    )]
    QuadratureBudget {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("gamma shape {shape} must exceed 2 for inverse-gamma moments")]
    ShapeTooSmall { shape: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("zero vector where a nonzero channel is required")]
    ZeroVector,

    #[error("series diverges: scale ratio {ratio} is not below 1")]
    SeriesDivergence { ratio: f64 },
}

impl QdError {
    /// True for failures of a numerical budget (quadrature, series,
    /// continued fractions) as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QdError::NonConvergence { .. }
                | QdError::QuadratureBudget { .. }
                | QdError::NonFiniteIntegrand { .. }
                | QdError::SeriesDivergence { .. }
        )
    }
}
