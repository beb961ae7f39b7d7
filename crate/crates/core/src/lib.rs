//! Simulation of velocity-selective hole burning in a Doppler-broadened vapor
//! and of the probe-detuning tomograms that read the burned pattern back.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod imaging;
pub mod medium;
pub mod objects;
pub mod oracle;
pub mod physics;
pub mod scenario;

pub use error::{Error, Result};
