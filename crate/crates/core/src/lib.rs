//! Certified least-fixpoint bounds for positive polynomial systems (PPS).
//!
//! The pipeline takes a system `x = f(x)` with non-negative rational
//! coefficients, computes floating-point lower bounds and optimistic upper
//! bound guesses along an approximate Perron–Frobenius direction, and then
//! rationalizes and re-checks every candidate in exact arithmetic. Only
//! exactly verified bounds leave the crate as [`Certificate`]s.
//!
//! The numeric core ([`pps`], [`lower`], [`eigen`], [`ovi`]) is generic over
//! the scalar type via [`Scalar`]; the aliases below fix the concrete types
//! used by the solver and the checker.

pub mod cert;
pub mod checker;
pub mod eigen;
pub mod lower;
pub mod ovi;
pub mod ppda;
pub mod pps;
pub mod random;
pub mod rational;
pub mod scalar;
pub mod solve;
pub mod sparse;

pub use cert::{Certificate, Provenance, RoundingGrain};
pub use checker::{verify_certificate, verify_certificate_text, Verdict};
pub use ovi::{OviParams, Strategy};
pub use pps::{DepGraph, Monomial, PolySystem, VarId};
pub use scalar::Scalar;
pub use solve::{solve, SolveError, Solved};
pub use sparse::SparseMatrix;

/// Exact coefficient and certificate scalar.
pub type Rational = num_rational::BigRational;

/// Candidate vector in binary64, indexed by variable declaration order.
pub type FloatVec = Vec<f64>;

/// Candidate vector in exact arithmetic, indexed by variable declaration order.
pub type RationalVec = Vec<Rational>;

/// Jacobian in binary64.
pub type FloatMatrix = SparseMatrix<f64>;

/// Jacobian in exact arithmetic.
pub type RationalMatrix = SparseMatrix<Rational>;
