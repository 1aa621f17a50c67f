//! Crate-wide error type. Every failure is explicit; no operation ever
//! returns a silently wrong value.

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Trial division left a cofactor larger than bound^2.
    #[error("unfactored cofactor {cofactor} exceeds the trial-division bound squared")]
    UnfactoredCofactor { cofactor: BigInt },

    /// A diagonal form or form literal contained a zero coefficient.
    #[error("quadratic forms must be nondegenerate: zero coefficient at position {index}")]
    ZeroCoefficient { index: usize },

    /// A Gram matrix with zero determinant was handed to the diagonalizer.
    #[error("singular form: the Gram matrix has determinant zero")]
    SingularForm,

    /// A matrix handed in as symmetric was not.
    #[error("matrix is not symmetric")]
    NotSymmetric,

    /// Bounded search ended without a certified result.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// A requested invariant profile violates the existence conditions.
    #[error("no form with the requested invariants exists: {0}")]
    Infeasible(String),

    /// A witness was requested for a cusp type the class obstructs.
    #[error("cusp type `{cusp}` is not admissible for this commensurability class")]
    Inadmissible { cusp: &'static str },

    /// The rotation part does not preserve the ambient rank-3 form.
    #[error("rotation part is not an isometry of the given rank-3 form")]
    NotAnIsometry,

    /// A rank-6 form with discriminant class other than -1 cannot be rescaled.
    #[error("discriminant class must be -1 (got {got})")]
    WrongDiscriminant { got: BigInt },

    /// An operation required a specific signature.
    #[error("expected signature ({want_pos},{want_neg}), got ({got_pos},{got_neg})")]
    WrongSignature {
        want_pos: u32,
        want_neg: u32,
        got_pos: u32,
        got_neg: u32,
    },

    /// The stabilization formula produced a negative torus count.
    #[error("stabilization formula yields negative k = {k}")]
    NegativeK { k: i64 },

    /// The matrix is not unipotent.
    #[error("matrix is not unipotent: (M - I)^n is nonzero")]
    NotUnipotent,

    /// Malformed user input (CLI literals, matrices, vectors).
    #[error("parse error: {0}")]
    Parse(String),
}
