//! Aligned multi-objective optimization.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod driver;
pub mod error;
pub mod hessians;
pub mod linalg;
pub mod objective;
pub mod problems;
pub mod weighting;

pub use error::{Error, Result};
