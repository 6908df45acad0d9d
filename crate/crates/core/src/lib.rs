//! Exact subdifferential calculus for piecewise-affine convex functions and
//! their differences, with sampling oracles for black-box functions.

pub mod calculus;
pub mod cli;
pub mod dinioracle;
pub mod error;
pub mod funcmodel;
pub mod optimality;
pub mod polykernel;

pub use error::{Error, Result};
