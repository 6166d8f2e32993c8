//! Numerical laboratory for explicit formulas attached to Dirichlet L-functions.
//!
//! The crate computes Dirichlet characters and their Gauss sums, evaluates
//! `L(s, chi)` together with the functional-equation factor, locates
//! critical-line zeros, and forms the two dual sums (one over zeros, one over
//! prime powers) whose cancellation the experiments in [`verify`] measure.

pub mod arith;
pub mod bump;
pub mod characters;
pub mod error;
pub mod gauss;
pub mod lfunc;
pub mod quad;
pub mod report;
pub mod special;
pub mod summation;
pub mod sums;
pub mod verify;
pub mod zeros;

pub use error::{LchiError, Result};
