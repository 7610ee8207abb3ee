//! Calibration of the surrogate noise law from simulated symbols.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::surrogate_channel::{log_sum_exp, NlinParams};

/// Transmitted and received (normalized) center-channel symbols at one power.
#[derive(Debug, Clone)]
pub struct PowerMeasurement {
    pub power_w: f64,
    pub tx: Vec<Complex64>,
    pub rx: Vec<Complex64>,
}

impl PowerMeasurement {
    /// Mean squared residual `|rx - tx|^2`.
    pub fn residual_variance(&self) -> f64 {
        self.tx.iter().zip(&self.rx).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>() / self.tx.len() as f64
    }
}

/// Fitted surrogate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateFit {
    /// Fitted ASE variance (W).
    pub sigma2_ase: f64,
    /// Fitted NLIN coefficient (W⁻²).
    pub kappa: f64,
    /// RMS relative misfit of `nu(p) p` over the measured powers.
    pub fit_residual: f64,
}

impl SurrogateFit {
    pub fn params(&self) -> Result<NlinParams> {
        NlinParams::new(self.sigma2_ase, self.kappa, 0.0)
    }
}

/// Least-squares fit of `nu(p) p = sigma2_ase + kappa p^3`, weighted by the
/// inverse square of each left-hand side so all powers count in relative terms.
///
/// A negative slope is clamped to `kappa = 0` with `sigma2_ase` refitted alone.
pub fn fit_surrogate(measurements: &[PowerMeasurement]) -> Result<SurrogateFit> {
    if measurements.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least 3 powers, got {}",
            measurements.len()
        )));
    }
    let mut pts = Vec::with_capacity(measurements.len());
    for m in measurements {
        if m.tx.len() != m.rx.len() || m.tx.is_empty() {
            return Err(Error::Estimation("tx/rx symbol counts differ or are empty".into()));
        }
        if !(m.power_w > 0.0) {
            return Err(Error::InvalidPower(m.power_w));
        }
        let z = m.residual_variance() * m.power_w;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Estimation(format!("non-positive residual at {} W", m.power_w)));
        }
        pts.push((m.power_w.powi(3), z));
    }
    Ok(fit_points(&pts)?)
}

/// Weighted LS of `z = a + k x`, weights `1/z^2`.
fn fit_points(pts: &[(f64, f64)]) -> Result<SurrogateFit> {
    let (mut sw, mut sx, mut sxx, mut sz, mut sxz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    // Scale x to O(1) for conditioning.
    let xs = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    for &(x, z) in pts {
        let w = 1.0 / (z * z);
        let x = x / xs;
        sw += w;
        sx += w * x;
        sxx += w * x * x;
        sz += w * z;
        sxz += w * x * z;
    }
    let det = sw * sxx - sx * sx;
    if !(det.abs() > 1e-12 * sw * sxx) {
        return Err(Error::Estimation("singular fit: powers are not distinct".into()));
    }
    let mut a = (sxx * sz - sx * sxz) / det;
    let mut k = (sw * sxz - sx * sz) / det / xs;
    if k < 0.0 {
        k = 0.0;
        a = sz / sw;
    }
    if !(a > 0.0) {
        return Err(Error::Estimation(format!("fitted ASE variance {a} is not positive")));
    }
    let residual = (pts.iter().map(|&(x, z)| ((a + k * x - z) / z).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(SurrogateFit {
        sigma2_ase: a,
        kappa: k,
        fit_residual: residual,
    })
}

/// Mutual information lower bound (bits/symbol) with a Gaussian auxiliary
/// channel `q(y|x) ∝ exp(-|y - x|^2 / nu)`, `nu` fitted to the residuals,
/// for uniform input.
pub fn mi_gaussian_auxiliary(c: &Constellation, tx: &[Complex64], rx: &[Complex64]) -> Result<f64> {
    if tx.len() != rx.len() || tx.is_empty() {
        return Err(Error::Estimation("tx/rx symbol counts differ or are empty".into()));
    }
    let nu = tx.iter().zip(rx).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>() / tx.len() as f64;
    if nu == 0.0 {
        return Ok(4.0);
    }
    let mut metrics = [0.0; 16];
    let sum: f64 = tx
        .iter()
        .zip(rx)
        .map(|(x, y)| {
            for (m, p) in metrics.iter_mut().zip(c.points()) {
                *m = -(y - p).norm_sqr() / nu;
            }
            let own = -(y - x).norm_sqr() / nu;
            (own - log_sum_exp(&metrics)) / std::f64::consts::LN_2 + 4.0
        })
        .sum();
    Ok(sum / tx.len() as f64)
}
