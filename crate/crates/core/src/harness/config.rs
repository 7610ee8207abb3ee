//! JSON experiment configuration. Keys carry their units; unknown keys are
//! rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpc::{construct_code, read_alist, LdpcCode};
use crate::mlc::EstimateStructure;
use crate::ssfm::{FiberSystemParams, StepControl};
use crate::surrogate_channel::{calibrate_kappa, NlinParams};
use crate::units::dbm_to_w;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Power the nominal (fixed) statistics are derived from.
    pub p_opt_dbm: f64,
    pub p_min_dbm: f64,
    pub p_max_dbm: f64,
    pub p_step_db: f64,
    pub block_length: usize,
    pub ldpc_rate: f64,
    pub ldpc_seed: u64,
    /// Parity-check matrix in alist format, used instead of constructing one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ldpc_alist: Option<PathBuf>,
    /// Overrides the ASE variance derived from `fiber`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2_ase_w: Option<f64>,
    /// Overrides the coefficient calibrated to peak at `p_opt_dbm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_per_w2: Option<f64>,
    pub epsilon: f64,
    pub estimate_structure: EstimateStructure,
    pub nu_min: f64,
    pub target_ber: f64,
    pub mi_samples: usize,
    /// Seed for `mi-curve` and `calibrate`; sweeps take theirs on the command line.
    pub seed: u64,
    pub fiber: FiberSystemParams,
    pub calibration: CalibrationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p_opt_dbm: -6.8,
            p_min_dbm: -12.0,
            p_max_dbm: -3.0,
            p_step_db: 0.25,
            block_length: 4000,
            ldpc_rate: 0.63,
            ldpc_seed: 1,
            ldpc_alist: None,
            sigma2_ase_w: None,
            kappa_per_w2: None,
            epsilon: 0.0,
            estimate_structure: EstimateStructure::Scalar,
            nu_min: crate::matching::NU_MIN,
            target_ber: 1e-3,
            mi_samples: 100_000,
            seed: 1,
            fiber: FiberSystemParams::full_scale(),
            calibration: CalibrationConfig::default(),
        }
    }
}

/// Settings for the split-step calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Per-channel launch powers to simulate.
    pub powers_dbm: Vec<f64>,
    pub dbp: bool,
    pub ase: bool,
    pub step_control: StepControl,
    pub dbp_step_control: StepControl,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            powers_dbm: vec![-12.0, -10.0, -8.0, -6.8, -5.0, -3.0, -1.0],
            dbp: true,
            ase: true,
            step_control: StepControl::default(),
            dbp_step_control: StepControl::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Missing files are I/O errors,
    /// malformed or inconsistent contents are configuration errors. A
    /// relative `ldpc_alist` path is resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let (Some(alist), Some(dir)) = (&cfg.ldpc_alist, path.parent()) {
            if alist.is_relative() {
                cfg.ldpc_alist = Some(dir.join(alist));
            }
        }
        Ok(cfg)
    }

    /// The configured code: read from `ldpc_alist` if set, otherwise constructed.
    pub fn build_code(&self) -> Result<LdpcCode> {
        match &self.ldpc_alist {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let code = LdpcCode::from_parity_check(read_alist(&text, path)?)?;
                if code.n() != self.block_length {
                    return Err(Error::Config(format!(
                        "{} has length {}, block_length is {}",
                        path.display(),
                        code.n(),
                        self.block_length
                    )));
                }
                Ok(code)
            }
            None => construct_code(self.block_length, self.ldpc_rate, self.ldpc_seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("p_opt_dbm", self.p_opt_dbm),
            ("p_min_dbm", self.p_min_dbm),
            ("p_max_dbm", self.p_max_dbm),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if self.p_min_dbm > self.p_max_dbm {
            return Err(Error::Config("p_min_dbm exceeds p_max_dbm".into()));
        }
        if !(self.p_step_db > 0.0 && self.p_step_db.is_finite()) {
            return Err(Error::Config(format!("p_step_db={} must be positive", self.p_step_db)));
        }
        if !(self.target_ber > 0.0 && self.target_ber < 1.0) {
            return Err(Error::Config(format!("target_ber={} must lie in (0, 1)", self.target_ber)));
        }
        if !(self.nu_min > 0.0) {
            return Err(Error::Config(format!("nu_min={} must be positive", self.nu_min)));
        }
        if self.mi_samples < 10_000 {
            return Err(Error::Config(format!("mi_samples={} is below 10000", self.mi_samples)));
        }
        if self.block_length < 1000 {
            return Err(Error::Config(format!("block_length={} is below 1000", self.block_length)));
        }
        if !(self.ldpc_rate > 0.0 && self.ldpc_rate < 1.0) {
            return Err(Error::Config(format!("ldpc_rate={} must lie in (0, 1)", self.ldpc_rate)));
        }
        self.fiber.validate()?;
        self.nlin_params().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn p_opt_w(&self) -> f64 {
        dbm_to_w(self.p_opt_dbm)
    }

    /// Surrogate parameters: explicit values where given, otherwise the
    /// fiber's ASE variance and the coefficient peaking at `p_opt_dbm`.
    pub fn nlin_params(&self) -> Result<NlinParams> {
        let sigma2 = self.sigma2_ase_w.unwrap_or_else(|| self.fiber.sigma2_ase());
        let kappa = match self.kappa_per_w2 {
            Some(k) => k,
            None => calibrate_kappa(sigma2, self.p_opt_w())?,
        };
        NlinParams::new(sigma2, kappa, self.epsilon)
    }

    /// Sweep grid `p_min_dbm, p_min_dbm + step, ...` up to `p_max_dbm`.
    pub fn power_grid(&self) -> Vec<f64> {
        power_grid(self.p_min_dbm, self.p_max_dbm, self.p_step_db)
    }
}

/// Evenly spaced powers from `min` to `max` inclusive, rounded to 1e-9 dB so
/// that repeated additions do not leak into output files.
pub fn power_grid(min_dbm: f64, max_dbm: f64, step_db: f64) -> Vec<f64> {
    let count = ((max_dbm - min_dbm) / step_db + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((min_dbm + i as f64 * step_db) * 1e9).round() / 1e9)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let p = cfg.nlin_params().unwrap();
        assert!((p.kappa - 2.5015e5).abs() / 2.5015e5 < 1e-3);
    }

    #[test]
    fn unknown_and_unitless_keys_are_rejected() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"p_min": -12}"#), Err(Error::Config(_))));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"fiber": {"alpha": 0.2}}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"p_min_dbm": 0, "p_max_dbm": -1}"#),
            Err(Error::Config(_))
        ));
        let partial = ExperimentConfig::from_json(r#"{"block_length": 8000, "kappa_per_w2": 0}"#).unwrap();
        assert_eq!(partial.block_length, 8000);
        assert_eq!(partial.nlin_params().unwrap().kappa, 0.0);
    }

    #[test]
    fn grid_is_inclusive_and_clean() {
        let g = power_grid(-12.0, -3.0, 0.25);
        assert_eq!(g.len(), 37);
        assert_eq!(g[0], -12.0);
        assert_eq!(g[36], -3.0);
        assert_eq!(g[21], -6.75);
        assert_eq!(power_grid(1.0, 1.0, 0.5), vec![1.0]);
    }
}
