//! Optimal partial transport distances between persistence measures,
//! expected persistence diagrams, and their online quantization.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generators;
pub mod homology;
pub mod measures;
pub mod quantize;
pub mod transport;

pub use error::{Error, Result};
