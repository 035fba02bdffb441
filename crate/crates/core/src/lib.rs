// Validation uses `!(x > 0.0)` style checks on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod error;
pub mod hamiltonian;
pub mod nn;
pub mod sac;
pub mod sim;
pub mod trainer;

pub use error::{Error, Result};
