//! Exponential last-passage percolation laboratory.
//!
//! * [`analytic`]: closed forms (mean, shape, curvature, Rains m.g.f., rate
//!   functions, incomplete gamma, Faà di Bruno coefficients).
//! * [`randfield`]: counter-based reproducible weight fields.
//! * [`lpp`]: DP engines for bulk, one-sided, two-sided and northeast models.
//! * [`estimators`]: moments, bootstrap, KS tests, log-log fits.
//! * [`tilt`]: likelihood ratios, Chernoff bounds, importance sampling.
//! * [`invariants`]: exact pathwise checks on seeded fields.
//! * [`experiments`]: the named Monte Carlo experiments and their verdicts.

// Range checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod invariants;
pub mod lpp;
pub mod pool;
pub mod randfield;
mod serde_float;
pub mod tilt;

pub use error::{Error, Result};
