//! Minimax estimation of sparse normal means under signal-to-noise
//! constraints: closed-form risks, tuning, asymptotic approximations,
//! Bayes lower bounds and Monte-Carlo experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Test oracles keep every digit of their high-precision references.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod bayes;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod gaussian;
pub mod minimax;
pub mod optimize;
pub mod risk;
pub mod rng;
pub mod space;
pub mod tuning;

pub use error::{Error, Result};
