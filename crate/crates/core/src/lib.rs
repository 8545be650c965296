//! Finite-difference laboratory for tunneling in double-well Schrödinger
//! operators `H = −Δ + λ²(v(x) + v(x − d))` in one and two dimensions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensolve;
pub mod error;
pub mod grid_ops;
pub mod potential;

pub use error::{Error, Result};
pub mod hopping;
pub mod splitting;
pub mod verify;
pub mod config;
pub mod pipeline;
