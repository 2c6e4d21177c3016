//! Quaternary belief-propagation decoding toolkit for quantum stabilizer
//! codes: GF(4) algebra, CSS-family code constructors, overcomplete check
//! sets, a refined BP4 decoder with trainable weights, degeneracy-aware
//! training, and a Monte-Carlo evaluation harness.

pub mod algebra;
pub mod channel;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod harness;
pub mod overcomplete;
pub mod training;

pub use error::{Error, Result};
