//! Discretized pseudo-differential operators, their Schatten quasi-norms, and
//! the bound functionals that control them.

pub mod domains;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod jet;
pub mod quantize;
pub mod schatten;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
