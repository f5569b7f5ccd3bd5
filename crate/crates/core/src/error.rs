use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field size {size} exceeds the configured bound {bound}")]
    BoundExceeded { size: u128, bound: u64 },
    #[error("elements belong to different fields")]
    CtxMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of range for a set of size {size}")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("invalid polynomial: {0}")]
    InvalidPoly(String),
    #[error("modulus {0} is not squarefree")]
    NotSquarefree(String),
    #[error("the Legendre model needs odd characteristic")]
    EvenCharacteristic,
    #[error("no local factor supplied for prime {0}")]
    MissingLocalFactor(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("exact coefficient overflowed 128 bits ({0})")]
    Overflow(&'static str),
    #[error("q^n = {size} exceeds the enumeration budget {budget}; pass the override to run anyway")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("c = {c} is outside [0, {k}]")]
    COutOfRange { c: f64, k: u32 },
    #[error("twisted coefficients beyond degree {r} are not negligible (max |c_n| = {max_tail:e})")]
    TruncationFailure { r: usize, max_tail: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Module that raised this error, for machine-readable error records.
    pub fn module(&self) -> &'static str {
        match self {
            Error::NonPrime(_)
            | Error::DegreeZero
            | Error::BoundExceeded { .. }
            | Error::CtxMismatch
            | Error::DivisionByZero
            | Error::IndexOutOfRange { .. } => "finite-field",
            Error::InvalidPoly(_) | Error::NotSquarefree(_) => "poly-ring",
            Error::EvenCharacteristic
            | Error::MissingLocalFactor(_)
            | Error::HypothesisViolated(_)
            | Error::Overflow(_) => "l-coefficients",
            Error::BudgetExceeded { .. } => "progression-variance",
            Error::COutOfRange { .. } => "matrix-integrals",
            Error::TruncationFailure { .. } => "character-twists",
            Error::InvalidArgument(_) | Error::ConfigParse(_) | Error::Io(_) => "cli-harness",
        }
    }

    /// Short variant name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPrime(_) => "NonPrime",
            Error::DegreeZero => "DegreeZero",
            Error::BoundExceeded { .. } => "BoundExceeded",
            Error::CtxMismatch => "CtxMismatch",
            Error::DivisionByZero => "DivisionByZero",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidPoly(_) => "InvalidPoly",
            Error::NotSquarefree(_) => "NotSquarefree",
            Error::EvenCharacteristic => "EvenCharacteristic",
            Error::MissingLocalFactor(_) => "MissingLocalFactor",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::Overflow(_) => "Overflow",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::COutOfRange { .. } => "COutOfRange",
            Error::TruncationFailure { .. } => "TruncationFailure",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ConfigParse(_) => "ConfigParse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
