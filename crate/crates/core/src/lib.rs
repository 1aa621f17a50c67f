//! Exact-arithmetic invariants of rational quadratic forms, quaternion
//! algebra ramification, and the classification of compact flat 3-manifold
//! cusp cross-sections across commensurability classes of cusped arithmetic
//! hyperbolic 4-manifolds.
//!
//! The crate is organized bottom-up:
//!
//! * [`arith`] — factorization, valuations, squarefree parts, Legendre symbols;
//! * [`matrix`] — dense exact rational matrices;
//! * [`qform`] — diagonal forms, Hilbert symbols, Hasse-Witt invariants,
//!   p-excesses, rational and projective equivalence;
//! * [`construct`] — existence and construction of forms with prescribed
//!   invariants;
//! * [`quat`] — quaternion algebras over Q, ramification, torsion;
//! * [`cusp`] — cusp admissibility, witnesses, obstructions, enumeration;
//! * [`unipotent`] — binomial functional and unipotent reconstruction.
//!
//! All arithmetic is exact; there is no floating point in this crate.

pub mod arith;
pub mod construct;
pub mod cusp;
pub mod error;
pub mod matrix;
pub mod qform;
pub mod quat;
pub mod unipotent;

pub use error::Error;
pub use matrix::Matrix;
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use qform::{DiagonalForm, InvariantProfile, Place};
