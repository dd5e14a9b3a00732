//! The guide in `book/`, compiled so that every snippet runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}
#[doc = include_str!("../../../book/src/transport.md")]
pub mod transport {}
#[doc = include_str!("../../../book/src/homology.md")]
pub mod homology {}
#[doc = include_str!("../../../book/src/generators.md")]
pub mod generators {}
#[doc = include_str!("../../../book/src/quantization.md")]
pub mod quantization {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
