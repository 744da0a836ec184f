//! Known-interference channel toolkit.
//!
//! The receiver knows the interfering symbols `z[k]` but not the block-fading
//! gain `h` they arrive through. This crate provides:
//!
//! * [`channel`]: packet generation for `r = √Px·x + √Pz·h∘z + n` under block
//!   or continuous fading, with counter-based seeding.
//! * [`bkic`]: blind known-interference cancellation. Each block is
//!   pre-equalized, differenced by a `(T-1)×T` matrix that annihilates the
//!   interference, and reduced through an SVD to an equivalent MIMO channel
//!   `y'' = V₁·x' + ñ'`. Exhaustive ML and pilot-aided ZF detectors operate on
//!   that channel.
//! * [`baselines`]: least-squares cancellation, BKIC-ZF with the closed-form
//!   inverse, and orthogonal-training cancellation.
//! * [`rates`]: closed-form achievable rates and upper bounds.
//! * [`harness`]: sweeps, Monte Carlo campaigns, the validation suite and CSV
//!   output used by the `bkic` command line tool.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bkic;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod modulation;
pub mod rates;
pub mod rng;

pub use num_complex::Complex64;

pub use crate::baselines::{CancellerReport, LsEstimate, Q1System, SinrBreakdown};
pub use crate::bkic::{BkicPipeline, RecoveredBlock};
pub use crate::channel::{ChannelParams, FadingSpec, InterferenceSpec, PacketRecord, TargetSource};
pub use crate::error::{Error, Result};
pub use crate::rates::{LogBase, RatePoint};

/// Interference symbols at or below this magnitude are treated as silent.
pub const ZERO_POWER_THRESHOLD: f64 = 1e-6;

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
