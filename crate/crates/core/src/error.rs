use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live in different generator registries")]
    RegistryMismatch,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{0}` listed twice")]
    DuplicateGenerator(String),
    #[error("registry holds {0} generators, at most 64 are supported")]
    RegistryTooLarge(usize),
    #[error("expected an odd linear combination of generators")]
    NotOdd,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("caustic: {0}")]
    Caustic(String),
    #[error("exact star product needs at least one polynomial factor")]
    NonPolynomialExact,
    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),
    #[error("limit estimate did not converge after {steps} steps (last estimate {last})")]
    NotConverged { steps: usize, last: f64 },
    #[error("trace vanishes at tau = {0}")]
    ZeroTrace(f64),
    #[error("odd Grassmann residue in scalar trace (max coefficient {0:e})")]
    ParityAnomaly(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
