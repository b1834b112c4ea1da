use thiserror::Error;

use crate::residue::ResidueError;

/// Arithmetic failures. Apart from `InvalidDiscriminant` and `InvalidIdeal`
/// on caller input, every variant means an internal invariant broke and the
/// current d must be abandoned.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("d = {0} is not a non-square positive integer ≡ 5 (mod 8)")]
    InvalidDiscriminant(i64),
    #[error("(Q={q}, P={p}) is not a primitive ideal for d = {d}")]
    InvalidIdeal { d: i64, q: i128, p: i128 },
    #[error("inexact division {num} / {den} in {context}")]
    InexactDivision { num: i128, den: i128, context: &'static str },
    #[error("128-bit overflow in {0}")]
    Overflow(&'static str),
    #[error("{context} produced discriminant other than d")]
    DiscriminantMismatch { context: &'static str },
    #[error("ideal reduction did not terminate within {0} steps")]
    ReductionDiverged(usize),
    #[error("nonzero 2-adic valuation {v} in {context}")]
    Valuation { v: i32, context: &'static str },
    #[error(transparent)]
    Residue(#[from] ResidueError),
}

pub(crate) fn exact_div(num: i128, den: i128, context: &'static str) -> Result<i128, ArithError> {
    if den == 0 || num % den != 0 {
        return Err(ArithError::InexactDivision { num, den, context });
    }
    Ok(num / den)
}
