//! Deterministic spectral sparsification by barrier potentials, with graph
//! sparsifiers, restricted invertibility, and finite-dimensional embeddings
//! built on top of it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bss;
pub mod embed;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod lab;
pub mod linalg;
pub mod ri;

pub use error::{Error, Result};
