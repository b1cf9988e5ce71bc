use thiserror::Error;

/// Errors raised by the channel model and its numerics.
///
/// Variants split into two families: domain errors (the request is outside
/// the model's validity region) and numerical failures (the request is valid
/// but an algorithm did not deliver). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("n = {n} exceeds the supported maximum of {max}")]
    TooManyUses { n: usize, max: usize },

    #[error("(mu kappa)^n overflows f64 for n = {n} (mu kappa = {product})")]
    Overflow { n: usize, product: f64 },

    #[error("capacity diverges: {0}")]
    Divergent(String),

    #[error("above threshold: {0}")]
    AboveThreshold(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("eigensolver failed: {reason} (residual {residual:e})")]
    Eigen { reason: String, residual: f64 },

    #[error("quadrature did not converge: estimate {value} with error {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("could not bracket the Lagrange multiplier in [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },
}

impl Error {
    /// True for failures of an algorithm on a valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigen { .. } | Error::Quadrature { .. } | Error::Bracket { .. } | Error::Overflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
