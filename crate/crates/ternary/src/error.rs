use thiserror::Error;

/// Crate-wide error type. Variants follow the failure classes the numeric
/// routines can actually hit; the payload says which argument or resource
/// was at fault.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (zero modulus, h = 0 in a difference polynomial, composite p where a
    /// prime is required, an approximant used outside its hypothesis).
    #[error("domain: {0}")]
    Domain(String),

    /// An intermediate value cannot be represented (m^n past 128 bits).
    #[error("range: {0}")]
    Range(String),

    /// The request is well-posed but bigger than the configured budget
    /// (sieve span, brute-force N, oracle q).
    #[error("resource: {0}")]
    Resource(String),

    /// A required precomputation is missing, e.g. a prime window that does
    /// not cover the summation range it is asked about.
    #[error("state: {0}")]
    State(String),

    /// An adaptive quadrature failed to reach its target accuracy within
    /// its refinement budget.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// Bad experiment configuration (unknown key, unsatisfiable windows).
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
