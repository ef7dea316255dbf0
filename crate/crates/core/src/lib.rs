//! Design and evaluation toolkit for full-diversity space codes (FDSC) on
//! MIMO optical wireless links with log-normal fading.
//!
//! The crate is organised bottom-up:
//!
//! - [`farey`]: exact rationals, Farey sequences and their successive-term
//!   properties.
//! - [`constellation`]: unipolar PAM, linear space codes and error sets.
//! - [`channel`]: log-normal channel sampling, the Gaussian Q-function and
//!   SNR conventions.
//! - [`quadrature`]: Gauss-Hermite rules used by the exact error-rate oracle.
//! - [`analysis`]: SISO/MIMO error-probability bounds, diversity gains and
//!   the full-diversity predicate.
//! - [`optimizer`]: the 2x2 max-min code design problem, its closed-form
//!   solution and an exact grid-search oracle.
//! - [`simulator`]: Monte Carlo BER estimation with exhaustive ML detection.
//! - [`experiment`]: experiment specs (TOML), bound curves and figure presets
//!   shared by the CLI and the acceptance suite.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod constellation;
mod error;
pub mod experiment;
pub mod farey;
pub mod optimizer;
pub mod quadrature;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
