//! Runs the guide snippets as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/marginals.md")]
pub mod marginals {}
#[doc = include_str!("../../../book/src/copulas.md")]
pub mod copulas {}
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
#[doc = include_str!("../../../book/src/rearrangement.md")]
pub mod rearrangement {}
#[doc = include_str!("../../../book/src/coskewness.md")]
pub mod coskewness {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
