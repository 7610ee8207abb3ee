//! Monte Carlo BER experiments over the surrogate channel.
//!
//! Every block draws its bits and noise from the stream
//! `(point seed, block index)`, with point seeds derived from the master seed
//! and the grid index. Tallies are integers, so results do not depend on how
//! blocks are scheduled across threads.

mod calibration;
mod config;
mod output;
mod survivability;

pub use calibration::{measure_power, mi_curve, run_calibration, CalibrationPoint, CalibrationReport, PowerRun};
pub use config::{power_grid, CalibrationConfig, ExperimentConfig};
pub use output::{emit, read_csv, write_csv, write_plot_data, CSV_HEADER};
pub use survivability::{survivability, SurvivabilityReport};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::ldpc::LdpcCode;
use crate::matching::{make_nominal, turbo_decode, DecodeResult, DecoderConfig, Strategy};
use crate::mlc::{mlc_encode, EstimateStructure, UPPER_LEVELS};
use crate::rng::{derive_seed, stream};
use crate::surrogate_channel::{transmit, ChannelState, NlinParams};
use crate::units::dbm_to_w;

/// Tallies for one power and decoder setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub power_dbm: f64,
    pub strategy: Strategy,
    pub r1: usize,
    pub r2: usize,
    pub blocks: u64,
    /// Information bits counted, all levels.
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub mean_passes: f64,
    pub mean_bp_iterations: f64,
    /// Blocks with at least one information-bit error.
    pub block_errors: u64,
    /// Information bits of the LDPC-coded level alone.
    pub coded_bits: u64,
    pub coded_errors: u64,
    pub seed: u64,
}

/// Fixed ingredients of an experiment: code, constellation and channel law.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub constellation: Constellation,
    pub code: LdpcCode,
    pub params: NlinParams,
    pub p_opt_w: f64,
    pub structure: EstimateStructure,
    pub nu_min: f64,
}

/// Outcome of decoding one block.
#[derive(Debug, Clone)]
pub struct BlockOutcome {
    pub bit_errors: u64,
    /// Errors among the LDPC information bits.
    pub coded_errors: u64,
    pub decode: DecodeResult,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    errors: u64,
    coded_errors: u64,
    block_errors: u64,
    passes: u64,
    bp_iterations: u64,
}

impl Experiment {
    pub fn new(code: LdpcCode, params: NlinParams, p_opt_w: f64, structure: EstimateStructure) -> Result<Self> {
        params.validate()?;
        if !(p_opt_w > 0.0 && p_opt_w.is_finite()) {
            return Err(Error::InvalidPower(p_opt_w));
        }
        Ok(Experiment {
            constellation: Constellation::default(),
            code,
            params,
            p_opt_w,
            structure,
            nu_min: crate::matching::NU_MIN,
        })
    }

    /// Builds the code and channel law described by `cfg`.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let code = cfg.build_code()?;
        let mut exp = Experiment::new(code, cfg.nlin_params()?, cfg.p_opt_w(), cfg.estimate_structure)?;
        exp.nu_min = cfg.nu_min;
        Ok(exp)
    }

    /// Decoder settings with the nominal statistics taken at the optimal power.
    pub fn decoder_config(&self, strategy: Strategy, r1: usize, r2: usize) -> Result<DecoderConfig> {
        let mut cfg = DecoderConfig::new(strategy, r1, r2, make_nominal(&self.params, self.p_opt_w, self.structure)?);
        cfg.nu_min = self.nu_min;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Information bits per block over all levels.
    pub fn bits_per_block(&self) -> usize {
        self.code.k() + UPPER_LEVELS * self.code.n()
    }

    /// Encodes, transmits at `p_w` and decodes block `block` of the point seeded by `seed`.
    pub fn run_block(&self, dec: &DecoderConfig, p_w: f64, seed: u64, block: u64) -> Result<BlockOutcome> {
        let mut rng = stream(seed, block);
        let info: Vec<u8> = (0..self.bits_per_block()).map(|_| rng.random::<bool>() as u8).collect();
        let frame = mlc_encode(&self.constellation, &self.code, &info)?;
        let state = ChannelState::new(p_w, self.code.n())?;
        let y = transmit(&self.constellation, &frame.symbols, &state, &self.params, &mut rng)?;
        let genie = make_nominal(&self.params, p_w, self.structure)?;
        let decode = turbo_decode(&self.constellation, &self.code, &y, dec, Some(&genie))?;
        let errors = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
        let k = self.code.k();
        Ok(BlockOutcome {
            bit_errors: errors(&info, &decode.info_bits),
            coded_errors: errors(&info[..k], &decode.info_bits[..k]),
            decode,
        })
    }
}

/// Runs `n_blocks` blocks at one power.
pub fn run_point(exp: &Experiment, p_dbm: f64, dec: &DecoderConfig, n_blocks: u64, seed: u64) -> Result<BerRecord> {
    if n_blocks == 0 {
        return Err(Error::Config("at least one block per point is required".into()));
    }
    dec.validate()?;
    let p_w = dbm_to_w(p_dbm);
    let tally = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let out = exp.run_block(dec, p_w, seed, b)?;
            Ok(Tally {
                errors: out.bit_errors,
                coded_errors: out.coded_errors,
                block_errors: (out.bit_errors > 0) as u64,
                passes: out.decode.passes_used as u64,
                bp_iterations: out.decode.bp_iterations as u64,
            })
        })
        .try_reduce(Tally::default, |a, b| {
            Ok(Tally {
                errors: a.errors + b.errors,
                coded_errors: a.coded_errors + b.coded_errors,
                block_errors: a.block_errors + b.block_errors,
                passes: a.passes + b.passes,
                bp_iterations: a.bp_iterations + b.bp_iterations,
            })
        })?;
    let bits = n_blocks * exp.bits_per_block() as u64;
    Ok(BerRecord {
        power_dbm: p_dbm,
        strategy: dec.strategy,
        r1: dec.r1,
        r2: dec.r2,
        blocks: n_blocks,
        bits,
        errors: tally.errors,
        ber: tally.errors as f64 / bits as f64,
        mean_passes: tally.passes as f64 / n_blocks as f64,
        mean_bp_iterations: tally.bp_iterations as f64 / n_blocks as f64,
        block_errors: tally.block_errors,
        coded_bits: n_blocks * exp.code.k() as u64,
        coded_errors: tally.coded_errors,
        seed,
    })
}

/// Runs every power of an ascending grid; point `i` uses seed `derive_seed(seed, i)`.
pub fn sweep(exp: &Experiment, grid_dbm: &[f64], dec: &DecoderConfig, n_blocks: u64, seed: u64) -> Result<Vec<BerRecord>> {
    if grid_dbm.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("power grid must be strictly ascending".into()));
    }
    grid_dbm
        .iter()
        .enumerate()
        .map(|(i, &p)| run_point(exp, p, dec, n_blocks, derive_seed(seed, i as u64)))
        .collect()
}
