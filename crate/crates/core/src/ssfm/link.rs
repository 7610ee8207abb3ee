//! Transmitter, amplified link and receiver DSP.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::solver::{SplitStepSolver, StepControl, StepStats};
use super::{ase_psd, FiberSystemParams, Waveform};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::surrogate_channel::complex_gaussian;

/// Root-raised-cosine amplitude response with unit passband gain.
fn rrc(f: f64, symbol_rate: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let lo = 0.5 * (1.0 - rolloff) * symbol_rate;
    let hi = 0.5 * (1.0 + rolloff) * symbol_rate;
    if f <= lo {
        1.0
    } else if f > hi {
        0.0
    } else {
        let x = std::f64::consts::PI / (rolloff * symbol_rate) * (f - lo);
        (0.5 * (1.0 + x.cos())).sqrt()
    }
}

fn signed_frequency(k: usize, n: usize, df: f64) -> f64 {
    if k < n.div_ceil(2) {
        k as f64 * df
    } else {
        (k as f64 - n as f64) * df
    }
}

/// Carrier offset of channel `c`, rounded to the FFT grid, in bins.
fn channel_bin_shift(params: &FiberSystemParams, c: usize, n: usize) -> i64 {
    let df = params.sample_rate() / n as f64;
    let offset = (c as f64 - 0.5 * (params.n_channels as f64 - 1.0)) * params.channel_spacing_hz;
    (offset / df).round() as i64
}

fn center_channel(params: &FiberSystemParams) -> usize {
    params.n_channels / 2
}

/// Builds the WDM waveform: RRC shaping per channel, each channel at
/// `launch_power_w` average power for unit-energy symbols.
///
/// Filtering is done on the periodic block in the frequency domain, so the
/// waveform is exactly periodic in `n_symbols` symbol periods.
pub fn tx_waveform(symbol_blocks: &[Vec<Complex64>], params: &FiberSystemParams, launch_power_w: f64) -> Result<Waveform> {
    params.validate()?;
    if symbol_blocks.len() != params.n_channels {
        return Err(Error::Config(format!(
            "{} symbol blocks for {} channels",
            symbol_blocks.len(),
            params.n_channels
        )));
    }
    let ns = symbol_blocks[0].len();
    if ns == 0 || symbol_blocks.iter().any(|b| b.len() != ns) {
        return Err(Error::Config("all channels need the same non-zero number of symbols".into()));
    }
    if !(launch_power_w >= 0.0 && launch_power_w.is_finite()) {
        return Err(Error::InvalidPower(launch_power_w));
    }
    let sps = params.samples_per_symbol;
    let n = ns * sps;
    let df = params.sample_rate() / n as f64;
    let gain = sps as f64 * launch_power_w.sqrt();

    let mut planner = FftPlanner::new();
    let fft_ns = planner.plan_fft_forward(ns);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for (c, block) in symbol_blocks.iter().enumerate() {
        let mut a = block.clone();
        fft_ns.process(&mut a);
        let shift = channel_bin_shift(params, c, n);
        for k in 0..n {
            let h = rrc(signed_frequency(k, n, df), params.symbol_rate_baud, params.rolloff);
            if h > 0.0 {
                let dst = (k as i64 + shift).rem_euclid(n as i64) as usize;
                spectrum[dst] += a[k % ns] * (gain * h);
            }
        }
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);
    let scale = 1.0 / n as f64;
    spectrum.iter_mut().for_each(|s| *s *= scale);
    Ok(Waveform::new(spectrum, params.sample_rate()))
}

/// Applies the span gain and, when `rng` is given, ASE of variance
/// `ase_psd * sample_rate` per sample.
pub fn amplify_edfa<R: Rng + ?Sized>(w: &Waveform, params: &FiberSystemParams, rng: Option<&mut R>) -> Waveform {
    let g = params.span_gain().sqrt();
    let sigma = (ase_psd(params) * w.sample_rate).sqrt();
    let samples = match rng {
        Some(rng) if sigma > 0.0 => w.samples.iter().map(|s| s * g + complex_gaussian(rng) * sigma).collect(),
        _ => w.samples.iter().map(|s| s * g).collect(),
    };
    Waveform::new(samples, w.sample_rate)
}

/// Output of [`simulate_link`].
#[derive(Debug, Clone)]
pub struct LinkRun {
    pub output: Waveform,
    pub steps: StepStats,
}

/// Propagates `input` through all spans. ASE is drawn from the stream
/// `(seed, span index)` when `ase` is set.
pub fn simulate_link(
    input: &Waveform,
    params: &FiberSystemParams,
    control: &StepControl,
    ase: bool,
    seed: u64,
) -> Result<LinkRun> {
    let mut solver = SplitStepSolver::new(input.len(), input.sample_rate);
    let mut w = input.clone();
    let mut steps = StepStats::default();
    let medium = params.medium();
    for span in 0..params.n_spans {
        let s = solver.propagate(&mut w.samples, &medium, params.span_length_km, control)?;
        steps.accepted += s.accepted;
        steps.rejected += s.rejected;
        w = if ase {
            amplify_edfa(&w, params, Some(&mut stream(seed, span as u64)))
        } else {
            amplify_edfa::<crate::rng::Stream>(&w, params, None)
        };
    }
    Ok(LinkRun { output: w, steps })
}

/// Receiver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxConfig {
    /// Launch power per channel, used to undo the signal scale (W).
    pub launch_power_w: f64,
    /// Single-channel digital back-propagation.
    pub dbp: bool,
    pub dbp_steps: StepControl,
}

impl Default for RxConfig {
    fn default() -> Self {
        RxConfig {
            launch_power_w: 1e-3,
            dbp: true,
            dbp_steps: StepControl::default(),
        }
    }
}

/// Recovers the center-channel symbols, normalized to unit energy.
///
/// Steps: shift the center channel to baseband, keep `|f| <= spacing/2`,
/// back-propagate every span (noise free, sign-flipped coefficients),
/// matched RRC filter, symbol-rate sampling, and one common phase rotation
/// maximizing the correlation with `tx_reference`.
pub fn rx_dsp(w: &Waveform, params: &FiberSystemParams, tx_reference: &[Complex64], rx: &RxConfig) -> Result<Vec<Complex64>> {
    let sps = params.samples_per_symbol;
    let n = w.len();
    if n % sps != 0 || n / sps != tx_reference.len() {
        return Err(Error::Config(format!(
            "waveform of {n} samples does not hold {} symbols at {sps} samples/symbol",
            tx_reference.len()
        )));
    }
    if !(rx.launch_power_w > 0.0) {
        return Err(Error::InvalidPower(rx.launch_power_w));
    }
    let ns = n / sps;
    let df = w.sample_rate / n as f64;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut spec = w.samples.clone();
    fwd.process(&mut spec);
    let shift = channel_bin_shift(params, center_channel(params), n);
    spec.rotate_left(shift.rem_euclid(n as i64) as usize);
    let half_band = 0.5 * params.channel_spacing_hz;
    for (k, s) in spec.iter_mut().enumerate() {
        if signed_frequency(k, n, df).abs() > half_band {
            *s = Complex64::new(0.0, 0.0);
        }
    }

    if rx.dbp {
        inv.process(&mut spec);
        let scale = 1.0 / n as f64;
        spec.iter_mut().for_each(|s| *s *= scale);
        let mut solver = SplitStepSolver::new(n, w.sample_rate);
        let back = params.medium().reversed();
        let g = params.span_gain().sqrt();
        for _ in 0..params.n_spans {
            spec.iter_mut().for_each(|s| *s /= g);
            solver.propagate(&mut spec, &back, params.span_length_km, &rx.dbp_steps)?;
        }
        fwd.process(&mut spec);
    }

    // Matched filter and decimation, folded in the frequency domain.
    let mut dec = vec![Complex64::new(0.0, 0.0); ns];
    for (k, s) in spec.iter().enumerate() {
        let h = rrc(signed_frequency(k, n, df), params.symbol_rate_baud, params.rolloff);
        if h > 0.0 {
            dec[k % ns] += s * h;
        }
    }
    planner.plan_fft_inverse(ns).process(&mut dec);
    let scale = 1.0 / (n as f64 * rx.launch_power_w.sqrt());
    dec.iter_mut().for_each(|s| *s *= scale);

    let corr: Complex64 = dec.iter().zip(tx_reference).map(|(y, a)| y * a.conj()).sum();
    let rot = Complex64::cis(-corr.arg());
    dec.iter_mut().for_each(|s| *s *= rot);
    Ok(dec)
}
