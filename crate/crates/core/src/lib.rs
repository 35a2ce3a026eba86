//! Renormalization-group analysis of small zero-mass solutions of the viscous
//! Burgers equation and related nonlinear heat equations.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod oracles;
pub mod profiles;
pub mod rg;
pub mod spectral;

pub use error::{Hypothesis, Result, RgError};
