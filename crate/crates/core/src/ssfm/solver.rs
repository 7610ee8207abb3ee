//! Symmetric split-step solver with local-error step control.
//!
//! Solves `dA/dz = -(alpha/2) A - i (beta2/2) d²A/dt² + i gamma |A|² A` on a
//! periodic time window. Each trial advances `2h` twice: once as a single
//! step of `2h` and once as two steps of `h`; the relative difference is the
//! local error estimate. The two-step result is kept, so every accepted step
//! is a composition of exactly unitary sub-steps when `alpha = 0`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{angular_frequencies, FiberSystemParams, Waveform};
use crate::error::{Error, Result};

/// Propagation coefficients. Negate all three to back-propagate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Power attenuation (1/km).
    pub alpha_per_km: f64,
    pub beta2_s2_per_km: f64,
    pub gamma_per_w_km: f64,
}

impl Medium {
    pub fn reversed(&self) -> Medium {
        Medium {
            alpha_per_km: -self.alpha_per_km,
            beta2_s2_per_km: -self.beta2_s2_per_km,
            gamma_per_w_km: -self.gamma_per_w_km,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    /// Target relative local error per accepted step.
    pub local_error: f64,
    pub initial_step_km: f64,
    pub min_step_km: f64,
    pub max_step_km: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            local_error: 1e-5,
            initial_step_km: 0.5,
            min_step_km: 1e-6,
            max_step_km: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// FFT plans and work buffers for one waveform length. Not shared between tasks.
pub struct SplitStepSolver {
    n: usize,
    omega2: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    coarse: Vec<Complex64>,
    fine: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl SplitStepSolver {
    pub fn new(n: usize, sample_rate: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        SplitStepSolver {
            n,
            omega2: angular_frequencies(n, sample_rate).iter().map(|w| w * w).collect(),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            coarse: vec![Complex64::new(0.0, 0.0); n],
            fine: vec![Complex64::new(0.0, 0.0); n],
            half: Vec::new(),
        }
    }

    fn fill_half_step(&mut self, medium: &Medium, h: f64) {
        let dz = 0.5 * h;
        let re = -0.5 * medium.alpha_per_km * dz;
        let im = 0.5 * medium.beta2_s2_per_km * dz;
        self.half.clear();
        self.half
            .extend(self.omega2.iter().map(|w2| Complex64::from_polar(re.exp(), im * w2)));
    }

    /// One symmetric step `L(h/2) N(h) L(h/2)` in place.
    fn step(&mut self, field: &mut [Complex64], medium: &Medium, h: f64, half: &[Complex64]) {
        let scale = 1.0 / self.n as f64;
        self.forward.process_with_scratch(field, &mut self.scratch);
        for (a, d) in field.iter_mut().zip(half) {
            *a *= d * scale;
        }
        self.inverse.process_with_scratch(field, &mut self.scratch);
        let g = medium.gamma_per_w_km * h;
        if g != 0.0 {
            for a in field.iter_mut() {
                *a *= Complex64::cis(g * a.norm_sqr());
            }
        }
        self.forward.process_with_scratch(field, &mut self.scratch);
        for (a, d) in field.iter_mut().zip(half) {
            *a *= d * scale;
        }
        self.inverse.process_with_scratch(field, &mut self.scratch);
    }

    /// Propagates `field` over `length_km` with adaptive steps.
    pub fn propagate(
        &mut self,
        field: &mut [Complex64],
        medium: &Medium,
        length_km: f64,
        control: &StepControl,
    ) -> Result<StepStats> {
        assert_eq!(field.len(), self.n);
        let mut stats = StepStats::default();
        let mut z = 0.0;
        let mut h = control.initial_step_km.min(control.max_step_km);
        let mut half_fine = Vec::new();
        let mut half_coarse = Vec::new();
        while z < length_km {
            let remaining = length_km - z;
            // Avoid leaving a sliver.
            let last = 2.0 * h >= remaining * (1.0 - 1e-12);
            let trial = if last { 0.5 * remaining } else { h };

            self.coarse.copy_from_slice(field);
            self.fine.copy_from_slice(field);
            self.fill_half_step(medium, 2.0 * trial);
            std::mem::swap(&mut self.half, &mut half_coarse);
            self.fill_half_step(medium, trial);
            std::mem::swap(&mut self.half, &mut half_fine);

            let mut coarse = std::mem::take(&mut self.coarse);
            let mut fine = std::mem::take(&mut self.fine);
            self.step(&mut coarse, medium, 2.0 * trial, &half_coarse);
            self.step(&mut fine, medium, trial, &half_fine);
            self.step(&mut fine, medium, trial, &half_fine);

            let (mut diff, mut norm) = (0.0, 0.0);
            for (f, c) in fine.iter().zip(&coarse) {
                diff += (f - c).norm_sqr();
                norm += f.norm_sqr();
            }
            let err = if norm > 0.0 { (diff / norm).sqrt() } else { 0.0 };
            let tol = control.local_error;

            if err > 2.0 * tol {
                stats.rejected += 1;
                h = 0.5 * trial;
                self.coarse = coarse;
                self.fine = fine;
                if h < control.min_step_km {
                    return Err(Error::NonConvergence(format!(
                        "step {h} km below minimum {} km at z = {z} km",
                        control.min_step_km
                    )));
                }
                continue;
            }

            field.copy_from_slice(&fine);
            self.coarse = coarse;
            self.fine = fine;
            z = if last { length_km } else { z + 2.0 * trial };
            stats.accepted += 1;
            let factor = 2f64.powf(1.0 / 3.0);
            h = if err > tol {
                trial / factor
            } else if err < 0.5 * tol {
                trial * factor
            } else {
                trial
            };
            h = h.clamp(control.min_step_km, control.max_step_km);
        }
        Ok(stats)
    }
}

/// Propagates a waveform over one span of the link.
pub fn propagate_span(w: &Waveform, params: &FiberSystemParams, control: &StepControl) -> Result<Waveform> {
    let mut solver = SplitStepSolver::new(w.len(), w.sample_rate);
    let mut out = w.samples.clone();
    solver.propagate(&mut out, &params.medium(), params.span_length_km, control)?;
    Ok(Waveform::new(out, w.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    fn lossless(beta2: f64, gamma: f64) -> FiberSystemParams {
        FiberSystemParams {
            alpha_db_per_km: 0.0,
            beta2_s2_per_km: beta2,
            gamma_per_w_km: gamma,
            ..FiberSystemParams::desk_scale()
        }
    }

    fn pulse(n: usize, dt: f64, t0: f64, peak_w: f64) -> Waveform {
        let samples = (0..n)
            .map(|i| {
                let t = (i as f64 - n as f64 / 2.0) * dt;
                Complex64::new(peak_w.sqrt() * (-t * t / (2.0 * t0 * t0)).exp(), 0.0)
            })
            .collect();
        Waveform::new(samples, 1.0 / dt)
    }

    fn spectrum(w: &Waveform) -> Vec<Complex64> {
        let mut s = w.samples.clone();
        FftPlanner::new().plan_fft_forward(s.len()).process(&mut s);
        s
    }

    #[test]
    fn dispersion_is_all_pass() {
        let w = pulse(1024, 1e-12, 10e-12, 1e-3);
        let params = lossless(-21.67e-24, 0.0);
        let out = propagate_span(&w, &params, &StepControl::default()).unwrap();
        let before = spectrum(&w);
        let peak = before.iter().map(|s| s.norm()).fold(0.0, f64::max);
        for (a, b) in before.iter().zip(spectrum(&out)) {
            assert!((a.norm() - b.norm()).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn pure_self_phase_modulation() {
        let w = pulse(512, 1e-12, 20e-12, 5e-3);
        let params = lossless(0.0, 1.27);
        let out = propagate_span(&w, &params, &StepControl::default()).unwrap();
        let l = params.span_length_km;
        for (a, b) in w.samples.iter().zip(&out.samples) {
            let exact = a * Complex64::cis(1.27 * a.norm_sqr() * l);
            assert!((exact - b).norm() < 1e-9, "{exact} {b}");
        }
    }

    #[test]
    fn loss_only_attenuates() {
        let w = pulse(256, 1e-12, 20e-12, 1e-3);
        let params = FiberSystemParams {
            beta2_s2_per_km: 0.0,
            gamma_per_w_km: 0.0,
            ..FiberSystemParams::desk_scale()
        };
        let out = propagate_span(&w, &params, &StepControl::default()).unwrap();
        assert!((out.energy() / w.energy() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn step_underflow_is_reported() {
        let w = pulse(256, 1e-12, 5e-12, 10.0);
        let control = StepControl {
            local_error: 1e-14,
            min_step_km: 1e-2,
            ..StepControl::default()
        };
        let r = propagate_span(&w, &lossless(-21.67e-24, 1.27), &control);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn back_propagation_inverts_dispersion() {
        let w = pulse(1024, 1e-12, 8e-12, 1e-3);
        let params = FiberSystemParams {
            gamma_per_w_km: 0.0,
            ..FiberSystemParams::desk_scale()
        };
        let mut solver = SplitStepSolver::new(w.len(), w.sample_rate);
        let mut field = w.samples.clone();
        let control = StepControl::default();
        solver.propagate(&mut field, &params.medium(), 50.0, &control).unwrap();
        solver.propagate(&mut field, &params.medium().reversed(), 50.0, &control).unwrap();
        for (a, b) in w.samples.iter().zip(&field) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
