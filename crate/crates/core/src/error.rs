//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The base of a digit expansion must be at least 2.
    #[error("invalid base {0}: must be at least 2")]
    InvalidBase(u64),

    /// The target base of the shift map must be at least 1.
    #[error("invalid target base 0: must be at least 1")]
    InvalidTarget,

    /// Input outside the operation's domain (e.g. radical of 0).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter combination outside a statement's hypothesis.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    /// The residue sequence for (M, N) is not ultimately periodic.
    #[error("sequence is not ultimately periodic for M={m}, N={n}")]
    NotPeriodic { m: u64, n: u64 },

    /// Cyclotomic elements of different orders cannot be combined.
    #[error("cyclotomic order mismatch: {0} vs {1}")]
    OrderMismatch(u64, u64),

    /// Cyclotomic order above the configured cap.
    #[error("cyclotomic order {order} exceeds configured cap {cap}")]
    OrderCapExceeded { order: u64, cap: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("zero polynomial has no root multiplicity")]
    ZeroPolynomial,

    /// Polynomial division left a nonzero remainder.
    #[error("inexact polynomial division: nonzero remainder")]
    InexactDivision,

    /// A parameter window does not fit in machine range.
    #[error("parameter window too large: {0}")]
    WindowTooLarge(String),

    /// A machine-checked statement failed on concrete input. Never
    /// swallowed: carries a rendered witness of the discrepancy.
    #[error("theorem violation in {identity}: {witness}")]
    TheoremViolation { identity: String, witness: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
