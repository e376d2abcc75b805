//! Proper scoring rules for probabilistic forecasts.
//!
//! Kernel scores (CRPS and its power-kernel generalizations), the scaled
//! and robust variants built from them, the log score and Dawid-Sebastiani,
//! together with diagnostics for scale dependence and outlier sensitivity,
//! and simulation studies comparing the rules for model selection.
//!
//! Scores are positively oriented: larger is better.

#![allow(
    clippy::excessive_precision,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::redundant_guards
)]

pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernels;
pub mod numerics;
pub mod scores;
pub mod table;

pub use error::{Error, Result};
