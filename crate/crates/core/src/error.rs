use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus must be positive")]
    ZeroModulus,

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{what} is not coprime to the modulus {q}")]
    NotCoprime { what: String, q: u64 },

    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),

    #[error("character is not primitive (conductor {conductor} for modulus {q})")]
    NotPrimitive { q: u64, conductor: u64 },

    #[error("kernel evaluation failed to reach accuracy {target:e} at x = {x} (estimated error {estimate:e})")]
    KernelAccuracy { x: f64, target: f64, estimate: f64 },

    #[error("truncation tail {tail:e} exceeds tolerance {tolerance:e} at cutoff {cutoff}")]
    Truncation {
        cutoff: u64,
        tail: f64,
        tolerance: f64,
    },

    #[error("enumeration cap exceeded: {0}")]
    ScaleCap(String),

    #[error("invalid kernel configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
