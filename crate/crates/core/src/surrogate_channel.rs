//! Time-varying conditionally Gaussian channel.
//!
//! Conditioned on the transmitted point `x` and the common launch power `p`
//! of all WDM channels, the normalized received sample is `y = x + n` with
//! `n` circularly symmetric Gaussian of variance
//!
//! ```text
//! nu(x, p) = (sigma2_ase + kappa * p^3) / p * (1 + epsilon * (|x|^2 - 1))
//! ```
//!
//! The receiver is assumed to normalize the signal scale perfectly, so a
//! change of launch power shows up only as a change of noise variance.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, ORDER};
use crate::error::{Error, Result};

/// Noise law of the surrogate channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlinParams {
    /// Accumulated ASE variance in the matched-filter symbol domain (W).
    pub sigma2_ase: f64,
    /// NLIN cubic coefficient (W⁻²).
    pub kappa: f64,
    /// Dependence of the noise variance on the instantaneous symbol energy.
    #[serde(default)]
    pub epsilon: f64,
}

impl NlinParams {
    pub fn new(sigma2_ase: f64, kappa: f64, epsilon: f64) -> Result<Self> {
        let p = NlinParams {
            sigma2_ase,
            kappa,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks sign constraints. `sigma2_ase = 0` is allowed only together with
    /// `kappa = 0` (noiseless channel).
    pub fn validate(&self) -> Result<()> {
        let finite = self.sigma2_ase.is_finite() && self.kappa.is_finite() && self.epsilon.is_finite();
        if !finite || self.sigma2_ase < 0.0 || self.kappa < 0.0 || self.epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma2_ase={}, kappa={}, epsilon={} must be finite and non-negative",
                self.sigma2_ase, self.kappa, self.epsilon
            )));
        }
        Ok(())
    }

    /// Average noise variance in the normalized domain at launch power `p`.
    pub fn noise_variance(&self, p: f64) -> Result<f64> {
        check_power(p)?;
        Ok((self.sigma2_ase + self.kappa * p.powi(3)) / p)
    }

    /// Multiplier applied to the average variance for a point of energy `energy`.
    pub fn energy_factor(&self, energy: f64) -> f64 {
        1.0 + self.epsilon * (energy - 1.0)
    }
}

/// Launch power state of one quasi-static block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    /// Actual average launch power of every WDM channel (W).
    pub p_true: f64,
    /// Symbols per block.
    pub block_length: usize,
}

impl ChannelState {
    pub fn new(p_true: f64, block_length: usize) -> Result<Self> {
        check_power(p_true)?;
        Ok(ChannelState {
            p_true,
            block_length,
        })
    }
}

fn check_power(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPower(p))
    }
}

/// `p / (sigma2_ase + kappa p³)`.
pub fn effective_snr(params: &NlinParams, p: f64) -> Result<f64> {
    check_power(p)?;
    Ok(p / (params.sigma2_ase + params.kappa * p.powi(3)))
}

/// The cubic coefficient placing the maximum of [`effective_snr`] at `p_star`.
///
/// Setting the derivative of `p / (a + k p³)` to zero gives `a = 2 k p³`.
pub fn calibrate_kappa(sigma2_ase: f64, p_star: f64) -> Result<f64> {
    if !(sigma2_ase > 0.0 && sigma2_ase.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma2_ase={sigma2_ase} must be positive")));
    }
    if !(p_star > 0.0 && p_star.is_finite()) {
        return Err(Error::InvalidParameter(format!("p_star={p_star} must be positive")));
    }
    Ok(sigma2_ase / (2.0 * p_star.powi(3)))
}

/// Draws a standard circularly symmetric complex Gaussian sample (unit variance).
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Per-point noise variances at launch power `p`, indexed by label.
fn point_variances(c: &Constellation, params: &NlinParams, p: f64) -> Result<[f64; ORDER]> {
    let base = params.noise_variance(p)?;
    let mut out = [0.0; ORDER];
    for (label, v) in out.iter_mut().enumerate() {
        *v = base * params.energy_factor(c.point(label as u8).norm_sqr());
        if base > 0.0 && *v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon={} gives a non-positive noise variance on ring {}",
                params.epsilon,
                c.ring_of_label(label as u8)
            )));
        }
    }
    Ok(out)
}

/// Passes unit-energy symbols through the channel.
pub fn transmit<R: Rng + ?Sized>(
    c: &Constellation,
    x: &[Complex64],
    state: &ChannelState,
    params: &NlinParams,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    params.validate()?;
    let base = params.noise_variance(state.p_true)?;
    // Validates epsilon against every ring.
    point_variances(c, params, state.p_true)?;
    Ok(x.iter()
        .map(|&xi| {
            let nu = base * params.energy_factor(xi.norm_sqr());
            xi + complex_gaussian(rng) * nu.sqrt()
        })
        .collect())
}

/// Monte Carlo mutual information estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub bits: f64,
    pub std_err: f64,
}

/// I(X;Y) in bits/symbol for uniform 16-QAM input over the channel at power `p`.
///
/// Uses the exact conditional densities. Noise draws are scaled from unit
/// Gaussians, so reusing a seed across powers gives common random numbers and
/// a smooth curve.
pub fn mi_uniform<R: Rng + ?Sized>(
    c: &Constellation,
    params: &NlinParams,
    p: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    params.validate()?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter("mi_uniform needs at least 2 samples".into()));
    }
    let vars = point_variances(c, params, p)?;
    if vars.iter().any(|&v| v <= 0.0) {
        // Noiseless: every point is resolved.
        return Ok(MiEstimate {
            bits: (ORDER as f64).log2(),
            std_err: 0.0,
        });
    }
    let log_norm: Vec<f64> = vars.iter().map(|v| -(std::f64::consts::PI * v).ln()).collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut metrics = [0.0f64; ORDER];
    for _ in 0..n_samples {
        let label = rng.random_range(0..ORDER);
        let y = c.points()[label] + complex_gaussian(rng) * vars[label].sqrt();
        for (k, m) in metrics.iter_mut().enumerate() {
            *m = log_norm[k] - (y - c.points()[k]).norm_sqr() / vars[k];
        }
        let lse = log_sum_exp(&metrics);
        // log2 [ p(y|x) / ((1/M) sum p(y|x')) ]
        let v = (metrics[label] - lse) / std::f64::consts::LN_2 + (ORDER as f64).log2();
        sum += v;
        sum_sq += v * v;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(MiEstimate {
        bits: mean,
        std_err: (var / n).sqrt(),
    })
}

/// Numerically stable `ln Σ exp(v)`.
#[inline]
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::units::dbm_to_w;

    const SIGMA2: f64 = 4.5627e-6;
    const P_STAR: f64 = 2.0893e-4;

    fn calibrated() -> NlinParams {
        NlinParams::new(SIGMA2, calibrate_kappa(SIGMA2, P_STAR).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn snr_at_optimum() {
        let params = NlinParams::new(SIGMA2, 2.5015e5, 0.0).unwrap();
        let snr = effective_snr(&params, P_STAR).unwrap();
        assert!((snr - 30.53).abs() < 0.01, "{snr}");
        assert!((10.0 * snr.log10() - 14.85).abs() < 0.01);
    }

    #[test]
    fn snr_linear_channel_and_high_power_limit() {
        let lin = NlinParams::new(SIGMA2, 0.0, 0.0).unwrap();
        assert_eq!(effective_snr(&lin, 1e-3).unwrap(), 1e-3 / SIGMA2);
        let p = calibrated();
        assert!(effective_snr(&p, 10.0).unwrap() < 1e-6);
        assert!(matches!(effective_snr(&p, 0.0), Err(Error::InvalidPower(_))));
        assert!(matches!(effective_snr(&p, -1.0), Err(Error::InvalidPower(_))));
    }

    #[test]
    fn kappa_closed_form() {
        let k = calibrate_kappa(SIGMA2, P_STAR).unwrap();
        assert!((k - 2.5015e5).abs() / 2.5015e5 < 1e-3, "{k}");
        let k2 = calibrate_kappa(2.0 * SIGMA2, P_STAR).unwrap();
        assert!((k2 / k - 2.0).abs() < 1e-14);
        assert!(calibrate_kappa(0.0, P_STAR).is_err());
        assert!(calibrate_kappa(SIGMA2, -1.0).is_err());
    }

    #[test]
    fn grid_argmax_matches_calibration_point() {
        let p = calibrated();
        let grid: Vec<f64> = (0..2001).map(|i| -16.8 + 0.01 * i as f64).collect();
        let best = grid
            .iter()
            .copied()
            .max_by(|a, b| {
                let sa = effective_snr(&p, dbm_to_w(*a)).unwrap();
                let sb = effective_snr(&p, dbm_to_w(*b)).unwrap();
                sa.partial_cmp(&sb).unwrap()
            })
            .unwrap();
        assert!((best - crate::units::w_to_dbm(P_STAR)).abs() <= 0.01 + 1e-9, "{best}");
    }

    #[test]
    fn snr_is_unimodal_on_geometric_grid() {
        let p = calibrated();
        let snr: Vec<f64> = (0..200)
            .map(|i| effective_snr(&p, 1e-6 * 1.05f64.powi(i)).unwrap())
            .collect();
        let signs: Vec<bool> = snr.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let c = Constellation::default();
        let params = NlinParams::new(0.0, 0.0, 0.0).unwrap();
        let x: Vec<_> = (0..64u8).map(|i| c.point(i % 16)).collect();
        let state = ChannelState::new(1e-3, x.len()).unwrap();
        let y = transmit(&c, &x, &state, &params, &mut stream(1, 0)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn noise_variance_at_optimum() {
        let c = Constellation::default();
        let params = calibrated();
        let n = 1_000_000;
        let x = vec![c.point(8); n];
        let state = ChannelState::new(P_STAR, n).unwrap();
        let y = transmit(&c, &x, &state, &params, &mut stream(11, 0)).unwrap();
        let var: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n as f64;
        let expected = 1.0 / effective_snr(&params, P_STAR).unwrap();
        assert!((expected - 0.03276).abs() < 1e-5);
        assert!((var / expected - 1.0).abs() < 0.005, "{var} vs {expected}");

        // Isotropy: real/imaginary parts are uncorrelated.
        let (mut srr, mut sii, mut sri) = (0.0, 0.0, 0.0);
        for (a, b) in y.iter().zip(&x) {
            let e = a - b;
            srr += e.re * e.re;
            sii += e.im * e.im;
            sri += e.re * e.im;
        }
        let rho = sri / (srr * sii).sqrt();
        assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "{rho}");
    }

    #[test]
    fn ring_dependent_variance() {
        let c = Constellation::default();
        let params = NlinParams::new(SIGMA2, calibrate_kappa(SIGMA2, P_STAR).unwrap(), 0.5).unwrap();
        let n = 400_000;
        let inner = c.point(8); // (1, 1)
        let outer = c.point(10); // (3, 3)
        let state = ChannelState::new(P_STAR, n).unwrap();
        let mut rng = stream(5, 0);
        let var = |x: Complex64, rng: &mut crate::rng::Stream| {
            let xs = vec![x; n];
            let y = transmit(&c, &xs, &state, &params, rng).unwrap();
            y.iter().map(|v| (v - x).norm_sqr()).sum::<f64>() / n as f64
        };
        let ratio = var(outer, &mut rng) / var(inner, &mut rng);
        assert!((ratio - 7.0 / 3.0).abs() / (7.0 / 3.0) < 0.01, "{ratio}");
    }

    #[test]
    fn epsilon_too_large_is_rejected() {
        let c = Constellation::default();
        let params = NlinParams::new(SIGMA2, 0.0, 1.3).unwrap();
        let state = ChannelState::new(P_STAR, 1).unwrap();
        let r = transmit(&c, &[c.point(8)], &state, &params, &mut stream(0, 0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn transmit_is_reproducible() {
        let c = Constellation::default();
        let params = calibrated();
        let x: Vec<_> = (0..100u8).map(|i| c.point(i % 16)).collect();
        let state = ChannelState::new(P_STAR, x.len()).unwrap();
        let a = transmit(&c, &x, &state, &params, &mut stream(3, 9)).unwrap();
        let b = transmit(&c, &x, &state, &params, &mut stream(3, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mi_limits() {
        let c = Constellation::default();
        let clean = NlinParams::new(1e-12, 0.0, 0.0).unwrap();
        let hi = mi_uniform(&c, &clean, 1e-3, 10_000, &mut stream(1, 0)).unwrap();
        assert!((hi.bits - 4.0).abs() < 1e-6, "{hi:?}");
        let noisy = NlinParams::new(1.0, 0.0, 0.0).unwrap();
        let lo = mi_uniform(&c, &noisy, 1e-6, 10_000, &mut stream(1, 0)).unwrap();
        assert!(lo.bits.abs() < 0.01, "{lo:?}");
        let noiseless = NlinParams::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(mi_uniform(&c, &noiseless, 1e-3, 10, &mut stream(1, 0)).unwrap().bits, 4.0);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let v = [-1.0, 0.5, 2.0];
        let direct = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-14);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
