//! Command-line driver for BER sweeps, calibration and MI curves.
//!
//! Exit status: 0 on success, 2 on configuration errors, 3 on I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use chanmatch::harness::{self, write_plot_data, Experiment, ExperimentConfig};
use chanmatch::ldpc::write_alist;
use chanmatch::{Error, Result, Strategy};

#[derive(Parser)]
#[command(name = "chanmatch", version, about = "Noise-statistics matching experiments for coded 16-QAM")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER over the configured power grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long, default_value_t = 3)]
        r1: usize,
        #[arg(long, default_value_t = 3)]
        r2: usize,
        #[arg(long, default_value_t = 200)]
        blocks: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory for ber.csv, summary.json and ber.dat.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fits the surrogate noise law to split-step simulations.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write waveform and symbol dumps here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
    },
    /// Surrogate mutual information over the configured power grid.
    MiCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Survivability interval of each curve in a sweep CSV.
    Survivability {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        target: f64,
    },
    /// Writes the configured parity-check matrix in alist format.
    ExportCode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct SweepEcho<'a> {
    experiment: &'a ExperimentConfig,
    strategy: Strategy,
    r1: usize,
    r2: usize,
    blocks: u64,
    seed: u64,
}

#[derive(Serialize)]
struct CurveReport {
    strategy: Strategy,
    r1: usize,
    r2: usize,
    survivability: harness::SurvivabilityReport,
}

fn write_file(path: &Path, contents: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            strategy,
            r1,
            r2,
            blocks,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = Experiment::from_config(&cfg)?;
            let dec = exp.decoder_config(strategy, r1, r2)?;
            let records = harness::sweep(&exp, &cfg.power_grid(), &dec, blocks, seed)?;
            let report = if records.len() >= 2 {
                Some(harness::survivability(&records, cfg.target_ber)?)
            } else {
                None
            };
            let echo = SweepEcho {
                experiment: &cfg,
                strategy,
                r1,
                r2,
                blocks,
                seed,
            };
            harness::emit(&records, report.as_ref(), &echo, &out)?;
            if let Some(r) = report {
                eprintln!("survivability: {:.2} dB", r.width_db);
            }
        }
        Command::Calibrate { config, out, dump_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = harness::run_calibration(&cfg, dump_dir.as_deref())?;
            write_file(&out, to_json(&report))?;
        }
        Command::MiCurve { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let curve = harness::mi_curve(&cfg)?;
            let points: Vec<(f64, f64)> = curve.iter().map(|(p, mi)| (*p, mi.bits)).collect();
            write_file(&out, write_plot_data("power_dbm", "mi_bits", &points))?;
        }
        Command::Survivability { input, target } => {
            let records = harness::read_csv(&input)?;
            let mut groups: Vec<((Strategy, usize, usize), Vec<harness::BerRecord>)> = Vec::new();
            for r in records {
                let key = (r.strategy, r.r1, r.r2);
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.push(r),
                    None => groups.push((key, vec![r])),
                }
            }
            let mut reports = Vec::new();
            for ((strategy, r1, r2), mut recs) in groups {
                recs.sort_by(|a, b| a.power_dbm.total_cmp(&b.power_dbm));
                reports.push(CurveReport {
                    strategy,
                    r1,
                    r2,
                    survivability: harness::survivability(&recs, target)?,
                });
            }
            print!("{}", to_json(&reports));
        }
        Command::ExportCode { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let code = cfg.build_code()?;
            write_file(&out, write_alist(code.h()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
