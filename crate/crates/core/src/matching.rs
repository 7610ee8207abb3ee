//! Adaptive channel-matching decoder.
//!
//! Three ways of choosing the noise statistics that feed the soft demapper:
//!
//! * `Fixed`: statistics implied by the optimal launch power, whatever the
//!   actual power is.
//! * `Genie`: the true statistics of the block.
//! * `Matched`: start from the fixed statistics, then alternate between
//!   decoding and re-estimating the statistics from the remapped decisions.
//!
//! Each `Matched` pass runs `r1` BP iterations from fresh messages; there are
//! at most `r2` re-estimation passes after the first. `Fixed` and `Genie`
//! get a single BP run with the same total budget `r1 * (r2 + 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, RINGS};
use crate::error::{Error, Result};
use crate::ldpc::LdpcCode;
use crate::mlc::{decide_upper, frame_info_bits, llr_level0, remap, EstimateStructure, NoiseEstimate};
use crate::surrogate_channel::{effective_snr, NlinParams};

/// Default variance floor.
pub const NU_MIN: f64 = 1e-6;
/// Minimum residual count for an independent ring estimate.
pub const MIN_RING_SAMPLES: usize = 10;
/// Relative estimate change below which a converged `Matched` decoder stops.
pub const ESTIMATE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Fixed,
    Genie,
    Matched,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Fixed => "fixed",
            Strategy::Genie => "genie",
            Strategy::Matched => "matched",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Strategy::Fixed),
            "genie" => Ok(Strategy::Genie),
            "matched" => Ok(Strategy::Matched),
            other => Err(Error::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub strategy: Strategy,
    /// BP iterations per pass.
    pub r1: usize,
    /// Re-estimation passes (`Matched` only).
    pub r2: usize,
    /// Statistics implied by the optimal power.
    pub nominal_estimate: NoiseEstimate,
    pub estimate_structure: EstimateStructure,
    pub nu_min: f64,
}

impl DecoderConfig {
    pub fn new(strategy: Strategy, r1: usize, r2: usize, nominal_estimate: NoiseEstimate) -> Self {
        DecoderConfig {
            strategy,
            r1,
            r2,
            estimate_structure: nominal_estimate.structure(),
            nominal_estimate,
            nu_min: NU_MIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r1 == 0 {
            return Err(Error::Config("r1 must be at least 1".into()));
        }
        if !(self.nu_min > 0.0 && self.nu_min.is_finite()) {
            return Err(Error::Config(format!("nu_min={} must be positive", self.nu_min)));
        }
        if self.nominal_estimate.structure() != self.estimate_structure {
            return Err(Error::Config(format!(
                "nominal estimate is {:?} but the configured structure is {:?}",
                self.nominal_estimate.structure(),
                self.estimate_structure
            )));
        }
        self.nominal_estimate
            .validate()
            .map_err(|e| Error::Config(format!("nominal estimate: {e}")))
    }

    /// Total BP iterations allowed to `Fixed` and `Genie`.
    pub fn iteration_budget(&self) -> usize {
        self.r1 * (self.r2 + 1)
    }
}

/// Diagnostics for one decoding pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassDiagnostics {
    /// Estimate used to compute this pass's LLRs.
    pub estimate: NoiseEstimate,
    pub bp_iterations: usize,
    pub converged: bool,
    pub syndrome_weight: usize,
    /// Rings that fell back to the pooled variance during estimation.
    pub ring_fallbacks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// `k` level-0 info bits followed by the `3n` upper-level bits.
    pub info_bits: Vec<u8>,
    /// Decoded level-0 codeword (hard decisions).
    pub codeword: Vec<u8>,
    pub converged: bool,
    /// Passes run, including the first.
    pub passes_used: usize,
    pub bp_iterations: usize,
    pub final_estimate: NoiseEstimate,
    pub passes: Vec<PassDiagnostics>,
}

/// Output of [`ml_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    pub estimate: NoiseEstimate,
    /// Rings estimated from the pooled residuals for lack of samples.
    pub ring_fallbacks: Vec<usize>,
}

/// Maximum-likelihood noise statistics from zero-mean residuals `y - x_hat`.
pub fn ml_estimate(
    c: &Constellation,
    y: &[Complex64],
    x_hat: &[Complex64],
    structure: EstimateStructure,
    nu_min: f64,
) -> Result<EstimateOutcome> {
    if y.len() != x_hat.len() {
        return Err(Error::Estimation(format!("{} received vs {} reference symbols", y.len(), x_hat.len())));
    }
    if y.len() < 100 {
        return Err(Error::Estimation(format!("need at least 100 symbols, got {}", y.len())));
    }
    let n = y.len();
    let residuals = y.iter().zip(x_hat).map(|(a, b)| a - b);
    let pooled = |sum: f64, count: usize| (sum / count as f64).max(nu_min);
    let mut ring_fallbacks = Vec::new();
    let estimate = match structure {
        EstimateStructure::Scalar => NoiseEstimate::Scalar {
            variance: pooled(residuals.map(|e| e.norm_sqr()).sum(), n),
            samples: n,
        },
        EstimateStructure::Full2x2 => {
            let (mut rr, mut ii, mut ri) = (0.0, 0.0, 0.0);
            for e in residuals {
                rr += e.re * e.re;
                ii += e.im * e.im;
                ri += e.re * e.im;
            }
            let nf = n as f64;
            let (mut rr, mut ii, ri) = (rr / nf, ii / nf, ri / nf);
            // Keep the estimate positive definite: floor the eigenvalues at nu_min / 2.
            let floor = nu_min / 2.0;
            let mean = 0.5 * (rr + ii);
            let dev = (0.25 * (rr - ii).powi(2) + ri * ri).sqrt();
            let ri = if mean - dev < floor {
                let lo = floor;
                let hi = (mean + dev).max(floor);
                if dev > 0.0 {
                    // Rebuild with eigenvalues (lo, hi) along the original eigenvectors.
                    let (c2, s2) = ((rr - ii) / (2.0 * dev), ri / dev);
                    rr = 0.5 * (hi + lo) + 0.5 * (hi - lo) * c2;
                    ii = 0.5 * (hi + lo) - 0.5 * (hi - lo) * c2;
                    0.5 * (hi - lo) * s2
                } else {
                    rr = floor;
                    ii = floor;
                    0.0
                }
            } else {
                ri
            };
            NoiseEstimate::Full2x2 {
                covariance: [[rr, ri], [ri, ii]],
                samples: n,
            }
        }
        EstimateStructure::PerRingScalar => {
            let mut sums = [0.0; RINGS];
            let mut counts = [0usize; RINGS];
            let mut total = 0.0;
            for (e, x) in residuals.zip(x_hat) {
                let r = c.ring_of(*x)?;
                sums[r] += e.norm_sqr();
                counts[r] += 1;
                total += e.norm_sqr();
            }
            let fallback = pooled(total, n);
            let mut variances = [0.0; RINGS];
            for r in 0..RINGS {
                variances[r] = if counts[r] < MIN_RING_SAMPLES {
                    ring_fallbacks.push(r);
                    fallback
                } else {
                    pooled(sums[r], counts[r])
                };
            }
            NoiseEstimate::PerRingScalar { variances, samples: n }
        }
    };
    Ok(EstimateOutcome {
        estimate,
        ring_fallbacks,
    })
}

/// Statistics implied by the surrogate law at power `p`, in the requested
/// structure. Variances are floored at [`NU_MIN`], which keeps a noiseless
/// law usable.
pub fn make_nominal(params: &NlinParams, p: f64, structure: EstimateStructure) -> Result<NoiseEstimate> {
    let nu = (1.0 / effective_snr(params, p)?).max(NU_MIN);
    let est = match structure {
        EstimateStructure::Scalar => NoiseEstimate::Scalar {
            variance: nu,
            samples: 0,
        },
        EstimateStructure::Full2x2 => NoiseEstimate::Full2x2 {
            covariance: [[nu / 2.0, 0.0], [0.0, nu / 2.0]],
            samples: 0,
        },
        EstimateStructure::PerRingScalar => {
            let energies = [0.2, 1.0, 1.8];
            NoiseEstimate::PerRingScalar {
                variances: energies.map(|e| (nu * params.energy_factor(e)).max(NU_MIN)),
                samples: 0,
            }
        }
    };
    Ok(est)
}

/// Decodes one block of received symbols.
pub fn turbo_decode(
    c: &Constellation,
    code: &LdpcCode,
    y: &[Complex64],
    cfg: &DecoderConfig,
    genie_estimate: Option<&NoiseEstimate>,
) -> Result<DecodeResult> {
    cfg.validate()?;
    if y.len() != code.n() {
        return Err(Error::Framing(format!("block of {} symbols for a length-{} code", y.len(), code.n())));
    }
    match cfg.strategy {
        Strategy::Fixed => single_pass(c, code, y, &cfg.nominal_estimate, cfg.iteration_budget()),
        Strategy::Genie => {
            let est = genie_estimate.ok_or_else(|| Error::Config("genie strategy needs the true estimate".into()))?;
            single_pass(c, code, y, est, cfg.iteration_budget())
        }
        Strategy::Matched => matched(c, code, y, cfg),
    }
}

fn single_pass(
    c: &Constellation,
    code: &LdpcCode,
    y: &[Complex64],
    est: &NoiseEstimate,
    iterations: usize,
) -> Result<DecodeResult> {
    let llr = llr_level0(c, y, est)?;
    let bp = code.decode(&llr, iterations);
    let upper = decide_upper(c, y, &bp.bits, est)?;
    Ok(DecodeResult {
        info_bits: frame_info_bits(code, &bp.bits, &upper),
        converged: bp.converged,
        passes_used: 1,
        bp_iterations: bp.iterations,
        final_estimate: *est,
        passes: vec![PassDiagnostics {
            estimate: *est,
            bp_iterations: bp.iterations,
            converged: bp.converged,
            syndrome_weight: bp.syndrome_weight,
            ring_fallbacks: Vec::new(),
        }],
        codeword: bp.bits,
    })
}

fn matched(c: &Constellation, code: &LdpcCode, y: &[Complex64], cfg: &DecoderConfig) -> Result<DecodeResult> {
    let mut est = cfg.nominal_estimate;
    let mut fallbacks = Vec::new();
    let mut passes = Vec::with_capacity(cfg.r2 + 1);
    let mut total_iters = 0;
    let mut pass = 0;
    loop {
        let llr = llr_level0(c, y, &est)?;
        let bp = code.decode(&llr, cfg.r1);
        total_iters += bp.iterations;
        let upper = decide_upper(c, y, &bp.bits, &est)?;
        passes.push(PassDiagnostics {
            estimate: est,
            bp_iterations: bp.iterations,
            converged: bp.converged,
            syndrome_weight: bp.syndrome_weight,
            ring_fallbacks: std::mem::take(&mut fallbacks),
        });

        let finish = |passes: Vec<PassDiagnostics>| DecodeResult {
            info_bits: frame_info_bits(code, &bp.bits, &upper),
            converged: bp.converged,
            passes_used: passes.len(),
            bp_iterations: total_iters,
            final_estimate: est,
            passes,
            codeword: bp.bits.clone(),
        };
        if pass == cfg.r2 {
            return Ok(finish(passes));
        }

        let x_hat = remap(c, &bp.bits, &upper)?;
        let outcome = ml_estimate(c, y, &x_hat, cfg.estimate_structure, cfg.nu_min)?;
        if bp.converged && outcome.estimate.relative_change(&est) < ESTIMATE_TOLERANCE {
            return Ok(finish(passes));
        }
        est = outcome.estimate;
        fallbacks = outcome.ring_fallbacks;
        pass += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::surrogate_channel::complex_gaussian;

    fn c() -> Constellation {
        Constellation::default()
    }

    fn points(n: usize) -> Vec<Complex64> {
        (0..n).map(|i| c().point((i % 16) as u8)).collect()
    }

    #[test]
    fn four_point_residuals() {
        let mut y: Vec<Complex64> = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
            .iter()
            .map(|&(a, b)| Complex64::new(a, b))
            .collect::<Vec<_>>()
            .repeat(25);
        let x = vec![Complex64::new(0.0, 0.0); 100];
        let scalar = ml_estimate(&c(), &y, &x, EstimateStructure::Scalar, NU_MIN).unwrap();
        assert_eq!(scalar.estimate, NoiseEstimate::Scalar { variance: 1.0, samples: 100 });
        let full = ml_estimate(&c(), &y, &x, EstimateStructure::Full2x2, NU_MIN).unwrap();
        assert_eq!(
            full.estimate,
            NoiseEstimate::Full2x2 {
                covariance: [[0.5, 0.0], [0.0, 0.5]],
                samples: 100
            }
        );
        y.truncate(99);
        assert!(ml_estimate(&c(), &y, &x[..99], EstimateStructure::Scalar, NU_MIN).is_err());
    }

    #[test]
    fn zero_residuals_hit_floor() {
        let x = points(160);
        for s in [EstimateStructure::Scalar, EstimateStructure::Full2x2, EstimateStructure::PerRingScalar] {
            let est = ml_estimate(&c(), &x, &x, s, NU_MIN).unwrap().estimate;
            est.validate().unwrap();
            match est {
                NoiseEstimate::Scalar { variance, .. } => assert_eq!(variance, NU_MIN),
                NoiseEstimate::Full2x2 { covariance, .. } => {
                    assert_eq!(covariance, [[NU_MIN / 2.0, 0.0], [0.0, NU_MIN / 2.0]])
                }
                NoiseEstimate::PerRingScalar { variances, .. } => assert_eq!(variances, [NU_MIN; 3]),
            }
        }
    }

    #[test]
    fn degenerate_full_covariance_stays_positive_definite() {
        // All residuals along the real axis.
        let x = vec![Complex64::new(0.0, 0.0); 200];
        let y: Vec<_> = (0..200).map(|i| Complex64::new(if i % 2 == 0 { 0.3 } else { -0.3 }, 0.0)).collect();
        let est = ml_estimate(&c(), &y, &x, EstimateStructure::Full2x2, NU_MIN).unwrap().estimate;
        est.validate().unwrap();
        if let NoiseEstimate::Full2x2 { covariance, .. } = est {
            assert!((covariance[0][0] - 0.09).abs() < 1e-12);
            assert!((covariance[1][1] - NU_MIN / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sparse_ring_falls_back_to_pooled() {
        // Only ring-1 points.
        let x: Vec<_> = (0..200).map(|_| c().point(1)).collect();
        let mut rng = stream(2, 0);
        let y: Vec<_> = x.iter().map(|v| v + complex_gaussian(&mut rng) * 0.1).collect();
        let out = ml_estimate(&c(), &y, &x, EstimateStructure::PerRingScalar, NU_MIN).unwrap();
        assert_eq!(out.ring_fallbacks, vec![0, 2]);
        if let NoiseEstimate::PerRingScalar { variances, .. } = out.estimate {
            assert_eq!(variances[0], variances[1]);
            assert_eq!(variances[2], variances[1]);
        }
    }

    #[test]
    fn nominal_estimates() {
        let params = NlinParams::new(4.5627e-6, 2.5015e5, 0.0).unwrap();
        let est = make_nominal(&params, 2.0893e-4, EstimateStructure::Scalar).unwrap();
        assert!((est.total_variance() - 0.03276).abs() < 1e-5);
        let lin = NlinParams::new(4.5627e-6, 0.0, 0.0).unwrap();
        let est = make_nominal(&lin, 2e-4, EstimateStructure::Scalar).unwrap();
        assert!((est.total_variance() - 4.5627e-6 / 2e-4).abs() < 1e-15);
        match make_nominal(&params, 2e-4, EstimateStructure::PerRingScalar).unwrap() {
            NoiseEstimate::PerRingScalar { variances, .. } => {
                assert_eq!(variances[0], variances[1]);
                assert_eq!(variances[1], variances[2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let nominal = NoiseEstimate::scalar(0.03);
        let mut cfg = DecoderConfig::new(Strategy::Matched, 0, 1, nominal);
        assert!(cfg.validate().is_err());
        cfg.r1 = 3;
        cfg.validate().unwrap();
        assert_eq!(cfg.iteration_budget(), 6);
        cfg.estimate_structure = EstimateStructure::Full2x2;
        assert!(cfg.validate().is_err());
        assert_eq!("genie".parse::<Strategy>().unwrap(), Strategy::Genie);
        assert!("other".parse::<Strategy>().is_err());
    }
}
