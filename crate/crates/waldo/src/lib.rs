//! Exact arithmetic toolkit for Waldspurger-style computations.
//!
//! The crate provides Kronecker and Hilbert symbols, local components of
//! quadratic Hecke characters, Waldspurger's local machinery (levels ñ_p and
//! the sets U_p), theta series of positive definite ternary quadratic forms
//! with coefficients in Q(√2, √3), Sturm-bound congruence proofs on
//! arithmetic progressions, and quadratic-twist invariants of a few elliptic
//! curve families, including conjectural Tate-Shafarevich orders.

pub mod characters;
pub mod cli;
pub mod curves;
pub mod error;
pub mod fixtures;
pub mod intarith;
pub mod numfield;
pub mod series;
pub mod thetaforms;
pub mod waldlocal;

pub use error::{Error, Result};
