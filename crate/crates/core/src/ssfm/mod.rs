//! Split-step Fourier simulation of a single-polarization WDM link.
//!
//! The link is `n_spans` identical spans of fiber, each followed by an EDFA
//! that restores the span loss and adds ASE. The receiver isolates the
//! center channel, back-propagates it, applies the matched RRC filter and
//! removes a common phase.
//!
//! Units: distance in km, time in s, power in W. `alpha` is given in dB/km
//! and converted to a power attenuation coefficient internally.

mod dump;
mod fit;
mod link;
mod solver;

pub use dump::{read_complex_dump, write_complex_dump, DumpHeader};
pub use fit::{fit_surrogate, mi_gaussian_auxiliary, PowerMeasurement, SurrogateFit};
pub use link::{amplify_edfa, rx_dsp, simulate_link, tx_waveform, LinkRun, RxConfig};
pub use solver::{propagate_span, Medium, SplitStepSolver, StepControl, StepStats};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the simulated link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberSystemParams {
    pub alpha_db_per_km: f64,
    pub gamma_per_w_km: f64,
    pub beta2_s2_per_km: f64,
    pub span_length_km: f64,
    pub n_spans: usize,
    pub planck_j_s: f64,
    pub center_frequency_hz: f64,
    pub n_sp: f64,
    pub channel_spacing_hz: f64,
    pub symbol_rate_baud: f64,
    pub rolloff: f64,
    pub n_channels: usize,
    pub n_symbols: usize,
    pub guard_fraction: f64,
    pub samples_per_symbol: usize,
}

impl Default for FiberSystemParams {
    fn default() -> Self {
        FiberSystemParams::full_scale()
    }
}

impl FiberSystemParams {
    /// 5 channels, 90 spans of 50 km, 3600-symbol trains.
    pub fn full_scale() -> Self {
        FiberSystemParams {
            alpha_db_per_km: 0.2,
            gamma_per_w_km: 1.27,
            beta2_s2_per_km: -21.67e-24,
            span_length_km: 50.0,
            n_spans: 90,
            planck_j_s: 6.626e-34,
            center_frequency_hz: 193.41e12,
            n_sp: 1.0,
            channel_spacing_hz: 50e9,
            symbol_rate_baud: 43.95e9,
            rolloff: 0.0667,
            n_channels: 5,
            n_symbols: 3600,
            guard_fraction: 0.0667,
            samples_per_symbol: 16,
        }
    }

    /// 3 channels, 10 spans, 1024 symbols.
    pub fn desk_scale() -> Self {
        FiberSystemParams {
            n_spans: 10,
            n_channels: 3,
            n_symbols: 1024,
            ..FiberSystemParams::full_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha_db_per_km", self.alpha_db_per_km),
            ("span_length_km", self.span_length_km),
            ("planck_j_s", self.planck_j_s),
            ("center_frequency_hz", self.center_frequency_hz),
            ("channel_spacing_hz", self.channel_spacing_hz),
            ("symbol_rate_baud", self.symbol_rate_baud),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}={v} must be positive")));
            }
        }
        let non_negative = [
            ("gamma_per_w_km", self.gamma_per_w_km),
            ("n_sp", self.n_sp),
            ("rolloff", self.rolloff),
            ("guard_fraction", self.guard_fraction),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}={v} must be non-negative")));
            }
        }
        if self.beta2_s2_per_km > 0.0 || !self.beta2_s2_per_km.is_finite() {
            return Err(Error::Config(format!(
                "beta2_s2_per_km={} must be negative (anomalous dispersion)",
                self.beta2_s2_per_km
            )));
        }
        if self.n_spans == 0 || self.n_channels == 0 || self.n_symbols == 0 || self.samples_per_symbol < 2 {
            return Err(Error::Config("n_spans, n_channels, n_symbols must be positive and samples_per_symbol >= 2".into()));
        }
        if self.rolloff > 1.0 {
            return Err(Error::Config(format!("rolloff={} must not exceed 1", self.rolloff)));
        }
        let occupied = self.symbol_rate_baud * (1.0 + self.rolloff);
        if occupied > self.channel_spacing_hz {
            return Err(Error::Config(format!(
                "occupied bandwidth {occupied} Hz exceeds channel spacing {} Hz",
                self.channel_spacing_hz
            )));
        }
        // The guard band is a fraction of the occupied bandwidth.
        let implied = occupied * (1.0 + self.guard_fraction);
        if (implied - self.channel_spacing_hz).abs() > 0.01 * self.channel_spacing_hz {
            return Err(Error::Config(format!(
                "occupied bandwidth {occupied} Hz plus guard {} does not match spacing {} Hz",
                self.guard_fraction, self.channel_spacing_hz
            )));
        }
        let edge = 0.5 * (self.n_channels as f64 - 1.0) * self.channel_spacing_hz + 0.5 * occupied;
        if edge >= 0.5 * self.sample_rate() {
            return Err(Error::Config(format!(
                "sample rate {} Hz aliases a comb reaching {edge} Hz",
                self.sample_rate()
            )));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate_baud * self.samples_per_symbol as f64
    }

    /// Span power gain `exp(alpha L_A)`.
    pub fn span_gain(&self) -> f64 {
        10f64.powf(self.alpha_db_per_km * self.span_length_km / 10.0)
    }

    /// Power attenuation coefficient in 1/km.
    pub fn alpha_per_km(&self) -> f64 {
        self.alpha_db_per_km * std::f64::consts::LN_10 / 10.0
    }

    pub fn medium(&self) -> Medium {
        Medium {
            alpha_per_km: self.alpha_per_km(),
            beta2_s2_per_km: self.beta2_s2_per_km,
            gamma_per_w_km: self.gamma_per_w_km,
        }
    }

    /// Accumulated ASE variance in the matched-filter symbol domain (W).
    pub fn sigma2_ase(&self) -> f64 {
        self.n_spans as f64 * ase_psd(self) * self.symbol_rate_baud
    }
}

/// ASE power spectral density of one amplifier, `(e^{alpha L_A} - 1) h nu n_sp` (W/Hz).
pub fn ase_psd(params: &FiberSystemParams) -> f64 {
    (params.span_gain() - 1.0) * params.planck_j_s * params.center_frequency_hz * params.n_sp
}

/// Sampled complex envelope.
///
/// Frequency 0 of the envelope is the center of the WDM comb.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Waveform { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of `|s|^2` (W).
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Sum of `|s|^2`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Angular frequency of each FFT bin (rad/s), in FFT order.
pub(crate) fn angular_frequencies(n: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / n as f64;
    (0..n)
        .map(|k| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            2.0 * std::f64::consts::PI * k * df
        })
        .collect()
}
