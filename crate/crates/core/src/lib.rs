//! Preamble-based channel estimation for OFDM/OQAM (FBMC/OQAM) systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`fbcore`]: prototype filter design, OQAM frame grids and the
//!   synthesis/analysis filter banks.
//! - [`interference`]: closed-form intrinsic interference weights, a
//!   brute-force inner-product oracle and pseudo-pilot computation.
//! - [`preamble`]: generators for the IAM, POP, interference-cancellation
//!   and MIMO preamble families.
//! - [`channel`]: tapped-delay-line Rayleigh channels with Kronecker
//!   spatial correlation, and AWGN.
//! - [`estimator`]: IAM, POP, sparse least-squares and interpolation-based
//!   estimators plus the NMSE metric.
//! - [`cpofdm`]: the CP-OFDM least-squares baseline.
//! - [`harness`]: Monte Carlo SNR sweeps with power equalisation at the
//!   synthesis filter bank output, PAPR profiling and result export.

pub mod channel;
pub mod cpofdm;
pub mod error;
pub mod estimator;
pub mod fbcore;
pub mod harness;
pub mod interference;
pub mod linalg;
pub mod preamble;

pub use error::{Error, Result};
pub use num_complex::Complex64;
