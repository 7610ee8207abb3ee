//! Adaptive noise-variance matching for multilevel-coded 16-QAM over a
//! nonlinear fiber channel.
//!
//! The crate contains a surrogate channel with power-dependent noise, a
//! split-step fiber simulator used to calibrate it, an LDPC code with a
//! belief-propagation decoder, the multilevel coding frame, the turbo-style
//! variance re-estimation decoder, and the BER sweep harness.

pub mod constellation;
pub mod error;
pub mod harness;
pub mod ldpc;
pub mod matching;
pub mod mlc;
pub mod rng;
pub mod ssfm;
pub mod surrogate_channel;
pub mod units;

pub use constellation::Constellation;
pub use error::{Error, Result};
pub use ldpc::{construct_code, LdpcCode, ParityCheckMatrix};
pub use harness::{BerRecord, Experiment, ExperimentConfig, SurvivabilityReport};
pub use matching::{turbo_decode, DecodeResult, DecoderConfig, Strategy};
pub use mlc::{EstimateStructure, NoiseEstimate};
pub use num_complex::Complex64;
pub use ssfm::{FiberSystemParams, Waveform};
pub use surrogate_channel::{ChannelState, NlinParams};

/// Library version string embedded in output summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
