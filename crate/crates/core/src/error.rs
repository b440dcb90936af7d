//! Error type shared across the library.
//!
//! Verifiers report, they never crash: anything a malformed or invalid
//! certificate can trigger surfaces as an `Error` value.

use crate::field::FieldSpec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: FieldSpec, found: FieldSpec },

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime modulus {0} exceeds 2^31")]
    ModulusTooLarge(u64),

    #[error("{0} is not a square-free non-square integer")]
    NotSquareFree(i64),

    #[error("cannot parse scalar {text:?}: {reason}")]
    ParseScalar { text: String, reason: String },

    #[error("cannot parse polynomial {text:?}: {reason}")]
    ParsePoly { text: String, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid leg partition: {0}")]
    InvalidPartition(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("field too small: {0}")]
    FieldTooSmall(String),

    #[error("unsupported field for this operation: {0}")]
    UnsupportedField(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("no square root of {0} in the field")]
    NoSquareRoot(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
