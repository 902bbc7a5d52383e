use num_bigint::BigInt;
use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: BigInt, modulus: BigInt },

    /// A configured budget (configuration cap, node cap, scan cap) was hit.
    /// Operations fail loudly instead of degrading to approximate answers.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("point is not inside the simplex")]
    NotInSimplex,

    #[error("basis is affinely dependent")]
    SingularBasis,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// A weight rewrite needs at least `required` copies of the configuration.
    #[error("insufficient weight: shift needs {required} copies")]
    InsufficientWeight { required: u64 },

    #[error("target vector has no decomposition")]
    NoDecomposition,

    #[error("certificate premises not verified: {0}")]
    NoCertificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn limit(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }
}
