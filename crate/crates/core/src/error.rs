use thiserror::Error;

/// Errors raised by the matrix kernels, steppers, problems and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("fixed-point iterate {iterate} became non-finite")]
    IterateDivergence { iterate: u32 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("integration diverged at step {step}: {cause}")]
    Divergence { step: usize, cause: String },

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("problem `{0}` has no energy diagnostic")]
    UnsupportedDiagnostic(String),

    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, SplitError>;
