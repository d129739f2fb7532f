//! Exact computation and construction engine for divisor-product-free sets:
//! subsets of {1, ..., n} in which no element divides the product of h other
//! pairwise-distinct elements.
//!
//! The crate provides a checker with verifiable witnesses, exact counts of
//! such subsets, extremal searches, randomized family constructions with
//! verified membership, multiplicative bases with coverage proofs, and
//! logarithmic bound envelopes, all deterministic for fixed inputs.

pub mod arith;
pub mod asymptotics;
pub mod basis;
pub mod cli;
pub mod constructions;
pub mod enumeration;
pub mod error;
pub mod files;
pub mod property;

pub use error::{Error, Result};
