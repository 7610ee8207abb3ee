//! Split-step calibration of the surrogate law, and surrogate MI curves.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::constellation::{Constellation, ORDER};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::ssfm::{
    fit_surrogate, mi_gaussian_auxiliary, rx_dsp, simulate_link, tx_waveform, write_complex_dump, FiberSystemParams,
    PowerMeasurement, RxConfig, StepStats, Waveform,
};
use crate::surrogate_channel::{mi_uniform, MiEstimate};
use crate::units::{dbm_to_w, lin_to_db, w_to_dbm};

/// Per-power outcome of the split-step run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub power_dbm: f64,
    /// Residual variance of the normalized center-channel symbols.
    pub nu: f64,
    pub snr_db: f64,
    pub mi_bits: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub sigma2_ase_w: f64,
    pub kappa_per_w2: f64,
    pub fit_residual: f64,
    /// Maximizer of the fitted effective SNR; absent when the fit is linear.
    pub p_opt_dbm: Option<f64>,
    pub points: Vec<CalibrationPoint>,
}

/// Result of simulating one launch power.
pub struct PowerRun {
    pub measurement: PowerMeasurement,
    pub received: Waveform,
    pub steps: StepStats,
}

/// Random uniform symbols for every channel, channel `c` from stream `(seed, c)`.
fn random_symbols(c: &Constellation, params: &FiberSystemParams, seed: u64) -> Vec<Vec<num_complex::Complex64>> {
    (0..params.n_channels)
        .map(|ch| {
            let mut rng = stream(seed, ch as u64);
            (0..params.n_symbols).map(|_| c.point(rng.random_range(0..ORDER) as u8)).collect()
        })
        .collect()
}

/// Transmits random symbols at `power_dbm` per channel and recovers the center channel.
pub fn measure_power(params: &FiberSystemParams, cfg: &super::CalibrationConfig, power_dbm: f64, seed: u64) -> Result<PowerRun> {
    let c = Constellation::default();
    let p = dbm_to_w(power_dbm);
    let symbols = random_symbols(&c, params, derive_seed(seed, 0));
    let tx = tx_waveform(&symbols, params, p)?;
    let run = simulate_link(&tx, params, &cfg.step_control, cfg.ase, derive_seed(seed, 1))?;
    let center = symbols[params.n_channels / 2].clone();
    let rx = RxConfig {
        launch_power_w: p,
        dbp: cfg.dbp,
        dbp_steps: cfg.dbp_step_control,
    };
    let recovered = rx_dsp(&run.output, params, &center, &rx)?;
    Ok(PowerRun {
        measurement: PowerMeasurement {
            power_w: p,
            tx: center,
            rx: recovered,
        },
        received: run.output,
        steps: run.steps,
    })
}

/// Simulates every calibration power, fits the surrogate law and, when
/// `dump_dir` is given, writes the received waveform and the transmitted and
/// recovered center-channel symbols for each power.
pub fn run_calibration(cfg: &ExperimentConfig, dump_dir: Option<&Path>) -> Result<CalibrationReport> {
    cfg.validate()?;
    let powers = &cfg.calibration.powers_dbm;
    if powers.len() < 3 {
        return Err(Error::Config(format!("calibration needs at least 3 powers, got {}", powers.len())));
    }
    if let Some(dir) = dump_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let c = Constellation::default();
    let runs: Vec<PowerRun> = powers
        .par_iter()
        .enumerate()
        .map(|(i, &p)| measure_power(&cfg.fiber, &cfg.calibration, p, derive_seed(cfg.seed, i as u64)))
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(runs.len());
    for (run, &p_dbm) in runs.iter().zip(powers) {
        let m = &run.measurement;
        let nu = m.residual_variance();
        points.push(CalibrationPoint {
            power_dbm: p_dbm,
            nu,
            snr_db: lin_to_db(1.0 / nu),
            mi_bits: mi_gaussian_auxiliary(&c, &m.tx, &m.rx)?,
            steps_accepted: run.steps.accepted,
            steps_rejected: run.steps.rejected,
        });
        if let Some(dir) = dump_dir {
            let tag = format!("{p_dbm:+.2}dbm");
            write_complex_dump(&dir.join(format!("rx_waveform_{tag}.bin")), &run.received.samples, run.received.sample_rate)?;
            write_complex_dump(&dir.join(format!("tx_symbols_{tag}.bin")), &m.tx, cfg.fiber.symbol_rate_baud)?;
            write_complex_dump(&dir.join(format!("rx_symbols_{tag}.bin")), &m.rx, cfg.fiber.symbol_rate_baud)?;
        }
    }
    let measurements: Vec<PowerMeasurement> = runs.into_iter().map(|r| r.measurement).collect();
    let fit = fit_surrogate(&measurements)?;
    let p_opt_dbm = (fit.kappa > 0.0).then(|| w_to_dbm((fit.sigma2_ase / (2.0 * fit.kappa)).cbrt()));
    Ok(CalibrationReport {
        sigma2_ase_w: fit.sigma2_ase,
        kappa_per_w2: fit.kappa,
        fit_residual: fit.fit_residual,
        p_opt_dbm,
        points,
    })
}

/// Surrogate MI over the configured power grid. Every point reuses the
/// stream `(seed, 0)`, so the curve is smooth in power.
pub fn mi_curve(cfg: &ExperimentConfig) -> Result<Vec<(f64, MiEstimate)>> {
    cfg.validate()?;
    let params = cfg.nlin_params()?;
    let c = Constellation::default();
    cfg.power_grid()
        .par_iter()
        .map(|&p| {
            let mut rng = stream(cfg.seed, 0);
            Ok((p, mi_uniform(&c, &params, dbm_to_w(p), cfg.mi_samples, &mut rng)?))
        })
        .collect()
}
