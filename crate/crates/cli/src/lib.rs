//! Command-line tools and experiment harness for [`epdq`].
//!
//! The library half exposes the experiment runners, the CSV record format,
//! the log-log regression and the SVG renderers so they can be driven from
//! tests as well as from the `epdq` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod records;
pub mod regression;

pub use error::{CliError, CliResult};
