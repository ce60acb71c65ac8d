use std::fmt;

/// Errors surfaced by the library. Dimension mismatches and similar
/// programmer errors panic instead; these are the conditions a caller can
/// legitimately hit with well-typed input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Division or inversion of zero.
    DivisionByZero,
    /// Inversion failed in a simple extension: the minimal polynomial is
    /// reducible. Carries the offending nonzero element as text.
    ReducibleMinpoly(String),
    /// The modulus of a prime field is not prime.
    NotPrime(u64),
    /// A declared invariant does not hold (bad structure constants,
    /// non-multiplicative map, non-exact complex, ...).
    Invariant(String),
    /// Two computations the theory forces to agree disagreed. This is the
    /// hard-failure channel of the cross-checking harnesses.
    EquivalenceViolation { label: String, witness: String },
    /// Session text could not be parsed.
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    /// A truncated-series computation gave different answers at adjacent
    /// precisions.
    InsufficientPrecision(String),
    /// The request is outside the implemented/configured bounds.
    Unsupported(String),
    /// A cooperative cancellation token fired.
    Cancelled,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::ReducibleMinpoly(e) => {
                write!(
                    f,
                    "inversion of {e} failed: minimal polynomial is reducible"
                )
            }
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::Invariant(m) => write!(f, "invariant violation: {m}"),
            Error::EquivalenceViolation { label, witness } => {
                write!(f, "equivalence violation [{label}]: {witness}")
            }
            Error::Parse { line, col, msg } => write!(f, "parse error at {line}:{col}: {msg}"),
            Error::InsufficientPrecision(m) => write!(f, "insufficient precision: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::Cancelled => write!(f, "cancelled"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
