//! Numerical laboratory for one-dimensional Gagliardo–Nirenberg interpolation
//! inequalities whose low-order term is a pointwise product of derivatives.
//!
//! The crate is organised bottom-up:
//!
//! * [`funcspace`] builds smooth, compactly supported test functions with exact
//!   derivatives and samples them on uniform grids.
//! * [`norms`] computes Lebesgue, derivative-product and fractional norms of
//!   sampled functions.
//! * [`gn`] holds the exponent algebra and evaluates the inequalities as
//!   lhs/rhs ratios.
//! * [`covering`] runs the balance-function subdivision with a Besicovitch-type
//!   interval selection.
//! * [`extremal`] searches for large lhs/rhs ratios (empirical constants).
//! * [`control`] simulates the four-state control-affine system whose terminal
//!   state is governed by these inequalities.
//! * [`cli`] wires everything into the `gnlab` command-line tool.
//!
//! Data-parallel loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iterators otherwise.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod control;
pub mod covering;
pub mod error;
pub mod exec;
pub mod extremal;
pub mod funcspace;
pub mod gn;
pub mod norms;

pub use error::{Error, Result};
