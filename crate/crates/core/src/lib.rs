//! Translation-invariant p-adic quasi Gibbs measures of the Potts model on the
//! Cayley tree of order two: p-adic arithmetic, tree combinatorics, finite
//! volume measures, the fixed-point dynamics of the boundary recursion, and
//! phase-transition diagnosis from exact norm exponents.

pub mod dynamics;
pub mod error;
pub mod padic;
pub mod phase;
pub mod potts;
pub mod selftest;
pub mod tree;

pub use error::{Error, Result};
