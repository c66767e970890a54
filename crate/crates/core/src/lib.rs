//! Integers with a large smooth divisor.
//!
//! `Theta(x, y, z)` counts the integers `n <= x` whose largest `y`-smooth
//! divisor exceeds `z`. This crate evaluates the Dickman and Buchstab
//! functions, the partial convolutions that make up the two-term asymptotic
//! formula for `Theta`, the related estimates for `Psi`, `Phi` and the
//! reciprocal sum `S(y, z)`, and exact sieve-based counts used to validate all
//! of them. The DSA large-subgroup exposure probability is included as an
//! application.

pub mod cli;
pub mod convolution;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod oracle;
pub mod quad;
pub mod render;
pub mod special;
pub mod sum;
pub mod validate;

pub use error::{Error, Result};
pub use special::{Constants, FunctionKind, PiecewiseFunction, SpecialFunctions, TableConfig};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
