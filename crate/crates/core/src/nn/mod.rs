//! Dense feed-forward networks with exact reverse-mode gradients, and Adam.

mod adam;
mod mlp;
mod scalar;

pub use adam::Adam;
pub use mlp::{Mlp, Tape};
pub use scalar::Scalar;
