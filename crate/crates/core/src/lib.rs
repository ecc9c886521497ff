//! Tree augmentation: cover every edge of a tree with as few links as possible.
//!
//! The solver ([`solver::tree_cover`]) is a 1.5-approximation built on a
//! coupon-based credit argument: it contracts subtrees of the evolving tree
//! `T/I` with exact covers whose size is always paid for by the credit
//! sitting in the contracted subtree. The [`oracle`] module provides the
//! exhaustive ground truth used to check the ratio, the lower bound that
//! backs the credit argument, and the legality of every contraction.

pub mod cli;
pub mod contraction;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod semiclosed;
pub mod solver;
pub mod structures;
pub mod treeops;
mod unionfind;

pub use error::{ParseError, TapError};
pub use instance::{GraphInput, Instance, Solution};
pub use solver::{tree_cover, SolveOptions};
