//! Monte Carlo experiment engine.
//!
//! A sweep draws one channel, one data burst and one unit-variance noise
//! sequence per trial and feeds every method the same draws. Noise is
//! passed through the receiver once and scaled per SNR point, which is exact
//! because the analysis bank and CP-OFDM demodulator are linear.

mod config;
mod normalize;
mod output;
mod papr;
mod sweep;

pub use config::{ExperimentConfig, Method, Normalization};
pub use normalize::{normalize_power, preamble_window, PowerTerms};
pub use output::{papr_csv, Manifest};
pub use papr::{papr_profile, papr_profile_signals, PaprProfile};
pub use sweep::{derive_seed, floor_onset, run_sweep, SeedPurpose, SweepPoint, SweepResult};
