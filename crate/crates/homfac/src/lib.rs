//! Homogeneous factorisations of complete graphs at desk scale.
//!
//! The library builds the finite-field Cayley graphs (generalised Paley,
//! twisted generalised Paley, Hamming), realises the small permutation
//! groups acting on them, enumerates the one-dimensional semilinear
//! parameter solutions that produce arc-transitive homogeneous
//! factorisations, and verifies everything it constructs: factorisation
//! axioms, graph isomorphisms, automorphism groups, cyclotomic scheme
//! axioms and extracted 2-designs.
//!
//! All construction is deterministic: fields pick a fixed modulus and
//! primitive element, closures insert in breadth-first order, and every
//! serialised artifact is byte-identical across runs.

// divisibility conditions are written as `x % d == 0` to mirror the
// arithmetic statements they implement
#![allow(clippy::manual_is_multiple_of)]

pub mod designs;
pub mod ffield;
pub mod formats;
pub mod graphs;
pub mod iso;
pub mod mat2;
pub mod onedim;
pub mod perm;
pub mod tables;

pub mod factorisation;

pub use ffield::{FieldElem, FieldSpec};

/// Library-wide error type. CLI exit codes map onto the variants:
/// invalid parameters (2), parse errors (3), exceeded caps (4).
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded(msg.into())
    }
}
