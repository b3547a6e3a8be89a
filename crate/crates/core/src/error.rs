use thiserror::Error;

/// Errors raised by the library. Validation failures of a well-formed spec are not
/// errors; they are reported through `ValidationReport`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Structural(String),
    #[error("series caps differ: {left} vs {right}")]
    CapMismatch { left: usize, right: usize },
    #[error("constant term {0} is not a unit in Z")]
    NonUnitConstant(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("elements use different generator tables")]
    MismatchedTables,
    #[error("unit {0} is divisible by p")]
    NonUnitCoefficient(u32),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
