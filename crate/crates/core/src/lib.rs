//! Embedding-closed generalized quantifiers on finite relational structures.
//!
//! The crate covers structures and atomic types ([`structure`], [`types`]),
//! embedding and homomorphism search ([`morphism`]), a first-order logic
//! extended with generator-defined quantifiers ([`logic`]), quantifier
//! elimination and chain stabilization on homogeneous structures
//! ([`qelim`]), the embedding game on finite and symbolic equivalence
//! structures ([`game`]), and random-structure experiments ([`zeroone`]).

pub mod catalog;
pub mod error;
pub mod game;
pub mod logic;
pub mod morphism;
pub mod qelim;
pub mod structure;
pub mod types;
pub mod zeroone;

pub use error::{Error, Result};
pub use structure::{Structure, Vocabulary};
