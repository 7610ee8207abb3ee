//! Result files: CSV records, JSON summary and two-column plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{BerRecord, SurvivabilityReport};
use crate::error::{Error, Result};
use crate::matching::Strategy;

pub const CSV_HEADER: &str = "power_dbm,strategy,r1,r2,blocks,bits,errors,ber,mean_passes,seed";

pub fn write_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:e},{},{}",
            r.power_dbm, r.strategy, r.r1, r.r2, r.blocks, r.bits, r.errors, r.ber, r.mean_passes, r.seed
        )
        .unwrap();
    }
    out
}

/// Parses records written by [`write_csv`]. Columns absent from the CSV
/// (`mean_bp_iterations`, `block_errors`, `coded_bits`, `coded_errors`) are
/// set to zero.
pub fn read_csv(path: &Path) -> Result<Vec<BerRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(err(1, format!("expected header {CSV_HEADER:?}"))),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 10 {
            return Err(err(i + 1, format!("{} fields, expected 10", f.len())));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|e| err(i + 1, format!("{s:?}: {e}")));
        let int = |s: &str| s.parse::<u64>().map_err(|e| err(i + 1, format!("{s:?}: {e}")));
        records.push(BerRecord {
            power_dbm: float(f[0])?,
            strategy: f[1].parse::<Strategy>().map_err(|e| err(i + 1, e.to_string()))?,
            r1: int(f[2])? as usize,
            r2: int(f[3])? as usize,
            blocks: int(f[4])?,
            bits: int(f[5])?,
            errors: int(f[6])?,
            ber: float(f[7])?,
            mean_passes: float(f[8])?,
            mean_bp_iterations: 0.0,
            block_errors: 0,
            coded_bits: 0,
            coded_errors: 0,
            seed: int(f[9])?,
        });
    }
    Ok(records)
}

/// Two whitespace-separated columns with a `#` header line.
pub fn write_plot_data(x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("# {x_label} {y_label}\n");
    for (x, y) in points {
        writeln!(out, "{x} {y:e}").unwrap();
    }
    out
}

#[derive(Serialize)]
struct Summary<'a, C: Serialize> {
    version: &'a str,
    config: &'a C,
    survivability: Option<&'a SurvivabilityReport>,
    records: &'a [BerRecord],
}

/// Writes `ber.csv`, `summary.json` and `ber.dat` (power vs BER) into `dir`,
/// creating it if needed. Output is a pure function of the inputs.
pub fn emit<C: Serialize>(
    records: &[BerRecord],
    report: Option<&SurvivabilityReport>,
    config: &C,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, contents: String| {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))
    };
    write("ber.csv", write_csv(records))?;
    let summary = Summary {
        version: crate::VERSION,
        config,
        survivability: report,
        records,
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    json.push('\n');
    write("summary.json", json)?;
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.power_dbm, r.ber)).collect();
    write("ber.dat", write_plot_data("power_dbm", "ber", &points))
}
