use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} inequality requires exponent `{name}`")]
    MissingExponent { kind: String, name: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("zero denominator: right-hand functional vanishes for this function")]
    ZeroDenominator,

    #[error("degenerate scaling data: {0}")]
    DegenerateFit(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that stem from user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MissingExponent { .. }
                | Error::InvalidParameter(_)
                | Error::Validation(_)
                | Error::DimensionMismatch { .. }
                | Error::Config(_)
        )
    }
}
