//! Multi-level coded 16-QAM.
//!
//! Level 0 of every symbol carries one bit of the LDPC codeword; levels 1-3
//! are uncoded within the inner scheme. With `k/n = 0.63` this carries
//! `0.63 + 3 = 3.63` information bits per symbol.
//!
//! Info-bit layout of a frame: the first `k` bits feed the LDPC encoder, the
//! remaining `3n` bits fill levels 1, 2, 3 of symbol 0, then symbol 1, and so
//! on.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::{level0_subset, pack_label, Constellation, ORDER, RINGS};
use crate::error::{Error, Result};
use crate::ldpc::LdpcCode;
use crate::surrogate_channel::log_sum_exp;

/// Upper (uncoded) levels per symbol.
pub const UPPER_LEVELS: usize = 3;

/// One transmitted block.
#[derive(Debug, Clone, PartialEq)]
pub struct MlcFrame {
    /// Level-0 bits, one LDPC codeword.
    pub ldpc_codeword: Vec<u8>,
    /// Levels 1-3, three bits per symbol.
    pub upper_bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
}

/// Structure of a noise estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStructure {
    Scalar,
    Full2x2,
    PerRingScalar,
}

impl std::str::FromStr for EstimateStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Self::Scalar),
            "full-2x2" => Ok(Self::Full2x2),
            "per-ring-scalar" => Ok(Self::PerRingScalar),
            other => Err(Error::Config(format!("unknown estimate structure {other:?}"))),
        }
    }
}

/// Noise statistics in the normalized symbol domain.
///
/// Variances are of the complex noise, `E|n|^2`. The 2x2 covariance is of
/// `[Re n, Im n]`, so an isotropic noise of variance `nu` has covariance
/// `diag(nu/2, nu/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "kebab-case")]
pub enum NoiseEstimate {
    Scalar { variance: f64, samples: usize },
    Full2x2 { covariance: [[f64; 2]; 2], samples: usize },
    PerRingScalar { variances: [f64; RINGS], samples: usize },
}

impl NoiseEstimate {
    pub fn scalar(variance: f64) -> Self {
        NoiseEstimate::Scalar { variance, samples: 0 }
    }

    pub fn structure(&self) -> EstimateStructure {
        match self {
            NoiseEstimate::Scalar { .. } => EstimateStructure::Scalar,
            NoiseEstimate::Full2x2 { .. } => EstimateStructure::Full2x2,
            NoiseEstimate::PerRingScalar { .. } => EstimateStructure::PerRingScalar,
        }
    }

    pub fn samples(&self) -> usize {
        match *self {
            NoiseEstimate::Scalar { samples, .. }
            | NoiseEstimate::Full2x2 { samples, .. }
            | NoiseEstimate::PerRingScalar { samples, .. } => samples,
        }
    }

    /// Total complex noise variance (average over rings for per-ring).
    pub fn total_variance(&self) -> f64 {
        match self {
            NoiseEstimate::Scalar { variance, .. } => *variance,
            NoiseEstimate::Full2x2 { covariance, .. } => covariance[0][0] + covariance[1][1],
            NoiseEstimate::PerRingScalar { variances, .. } => {
                // Ring multiplicities 4, 8, 4.
                (variances[0] + 2.0 * variances[1] + variances[2]) / 4.0
            }
        }
    }

    /// Checks positivity (and positive definiteness for 2x2).
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            NoiseEstimate::Scalar { variance, .. } => variance.is_finite() && *variance > 0.0,
            NoiseEstimate::Full2x2 { covariance: c, .. } => {
                let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
                c.iter().flatten().all(|v| v.is_finite())
                    && c[0][1] == c[1][0]
                    && c[0][0] > 0.0
                    && det > 0.0
            }
            NoiseEstimate::PerRingScalar { variances, .. } => variances.iter().all(|v| v.is_finite() && *v > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid noise estimate {self:?}")))
        }
    }

    /// Largest relative change of any variance parameter with respect to `prev`.
    pub fn relative_change(&self, prev: &NoiseEstimate) -> f64 {
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        match (self, prev) {
            (NoiseEstimate::Scalar { variance: a, .. }, NoiseEstimate::Scalar { variance: b, .. }) => rel(*a, *b),
            (NoiseEstimate::Full2x2 { covariance: a, .. }, NoiseEstimate::Full2x2 { covariance: b, .. }) => {
                let diff = (0..2)
                    .flat_map(|i| (0..2).map(move |j| (a[i][j] - b[i][j]).powi(2)))
                    .sum::<f64>()
                    .sqrt();
                let norm = b.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                diff / norm
            }
            (NoiseEstimate::PerRingScalar { variances: a, .. }, NoiseEstimate::PerRingScalar { variances: b, .. }) => {
                a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
            }
            _ => rel(self.total_variance(), prev.total_variance()),
        }
    }

    /// Per-candidate Gaussian log-density (up to a shared constant) of
    /// receiving `y` given `x`, tabulated per label.
    fn metric_table(&self) -> Metric {
        match *self {
            NoiseEstimate::Scalar { variance, .. } => Metric::Isotropic {
                inv: [1.0 / variance; RINGS],
                log_det: [0.0; RINGS],
            },
            NoiseEstimate::PerRingScalar { variances, .. } => Metric::Isotropic {
                inv: variances.map(|v| 1.0 / v),
                log_det: variances.map(f64::ln),
            },
            NoiseEstimate::Full2x2 { covariance: c, .. } => {
                let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
                // Quadratic form e^T C^-1 e / 2 for real covariance C.
                Metric::Full {
                    a: c[1][1] / det / 2.0,
                    b: -c[0][1] / det,
                    d: c[0][0] / det / 2.0,
                }
            }
        }
    }
}

enum Metric {
    /// `-|e|^2 inv[r] - log_det[r]`
    Isotropic { inv: [f64; RINGS], log_det: [f64; RINGS] },
    /// `-(a er^2 + b er ei + d ei^2)`
    Full { a: f64, b: f64, d: f64 },
}

impl Metric {
    #[inline]
    fn eval(&self, e: Complex64, ring: usize) -> f64 {
        match self {
            Metric::Isotropic { inv, log_det } => -e.norm_sqr() * inv[ring] - log_det[ring],
            Metric::Full { a, b, d } => -(a * e.re * e.re + b * e.re * e.im + d * e.im * e.im),
        }
    }
}

/// Maps `k + 3n` info bits onto one frame.
pub fn mlc_encode(c: &Constellation, code: &LdpcCode, info_bits: &[u8]) -> Result<MlcFrame> {
    let (n, k) = (code.n(), code.k());
    if info_bits.len() != k + UPPER_LEVELS * n {
        return Err(Error::Framing(format!(
            "expected {} info bits, got {}",
            k + UPPER_LEVELS * n,
            info_bits.len()
        )));
    }
    let ldpc_codeword = code.encode(&info_bits[..k])?;
    let upper_bits: Vec<u8> = info_bits[k..].iter().map(|b| b & 1).collect();
    let symbols = remap(c, &ldpc_codeword, &upper_bits)?;
    Ok(MlcFrame {
        ldpc_codeword,
        upper_bits,
        symbols,
    })
}

/// Info bits carried by a frame (inverse of [`mlc_encode`] for systematic codes).
pub fn frame_info_bits(code: &LdpcCode, codeword: &[u8], upper_bits: &[u8]) -> Vec<u8> {
    codeword[..code.k()].iter().chain(upper_bits).copied().collect()
}

/// Maps level-0 and upper-level bits to symbols, as the transmitter does.
pub fn remap(c: &Constellation, level0: &[u8], upper: &[u8]) -> Result<Vec<Complex64>> {
    if upper.len() != UPPER_LEVELS * level0.len() {
        return Err(Error::Framing(format!(
            "{} level-0 bits need {} upper bits, got {}",
            level0.len(),
            UPPER_LEVELS * level0.len(),
            upper.len()
        )));
    }
    Ok(level0
        .iter()
        .zip(upper.chunks_exact(UPPER_LEVELS))
        .map(|(&b0, u)| c.map_bits([b0, u[0], u[1], u[2]]))
        .collect())
}

/// Exact level-0 LLRs, `ln Σ_{x: b0=0} p(y|x) − ln Σ_{x: b0=1} p(y|x)`.
pub fn llr_level0(c: &Constellation, y: &[Complex64], est: &NoiseEstimate) -> Result<Vec<f64>> {
    est.validate()?;
    let metric = est.metric_table();
    let subsets = [level0_subset(0), level0_subset(1)];
    let rings: [usize; ORDER] = std::array::from_fn(|l| c.ring_of_label(l as u8));
    let mut m = [[0.0f64; 8]; 2];
    Ok(y.iter()
        .map(|&yi| {
            for (b, subset) in subsets.iter().enumerate() {
                for (slot, &label) in subset.iter().enumerate() {
                    m[b][slot] = metric.eval(yi - c.point(label), rings[label as usize]);
                }
            }
            log_sum_exp(&m[0]) - log_sum_exp(&m[1])
        })
        .collect())
}

/// Multistage decision of levels 1-3 given the decoded level-0 bits.
///
/// Picks the maximum-likelihood point in the coset selected by each level-0
/// bit; exact ties go to the lowest label.
pub fn decide_upper(c: &Constellation, y: &[Complex64], level0_bits: &[u8], est: &NoiseEstimate) -> Result<Vec<u8>> {
    if y.len() != level0_bits.len() {
        return Err(Error::Framing(format!(
            "{} symbols but {} level-0 bits",
            y.len(),
            level0_bits.len()
        )));
    }
    est.validate()?;
    let metric = est.metric_table();
    let subsets = [level0_subset(0), level0_subset(1)];
    let mut out = Vec::with_capacity(UPPER_LEVELS * y.len());
    for (&yi, &b0) in y.iter().zip(level0_bits) {
        let mut best = (f64::NEG_INFINITY, 0u8);
        // Subsets are in increasing label order, so strict `>` keeps the lowest label on ties.
        for &label in &subsets[(b0 & 1) as usize] {
            let v = metric.eval(yi - c.point(label), c.ring_of_label(label));
            if v > best.0 {
                best = (v, label);
            }
        }
        let l = best.1;
        out.extend_from_slice(&[l >> 1 & 1, l >> 2 & 1, l >> 3 & 1]);
    }
    Ok(out)
}

/// Label of a symbol given per-level bits; convenience for tests and tools.
pub fn label_of_bits(b0: u8, upper: &[u8]) -> u8 {
    pack_label([b0, upper[0], upper[1], upper[2]])
}
