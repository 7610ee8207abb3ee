//! Complex sample dumps: interleaved little-endian `f64` (re, im) pairs in a
//! `.bin` file, with a plain-text sidecar `<name>.txt` holding
//! `sample_rate_hz = <value>` and `length = <count>` lines.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    /// Samples per second; symbol rate for symbol dumps.
    pub sample_rate_hz: f64,
    pub length: usize,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("txt")
}

/// Writes `samples` to `path` and its sidecar.
pub fn write_complex_dump(path: &Path, samples: &[Complex64], sample_rate_hz: f64) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 * samples.len());
    for s in samples {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar(path);
    let text = format!("sample_rate_hz = {sample_rate_hz:e}\nlength = {}\n", samples.len());
    fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

/// Reads a dump written by [`write_complex_dump`].
pub fn read_complex_dump(path: &Path) -> Result<(DumpHeader, Vec<Complex64>)> {
    let side = sidecar(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let parse_err = |msg: String| Error::Parse { path: side.clone(), msg };
    let (mut rate, mut length) = (None, None);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("malformed line {line:?}")))?;
        match key.trim() {
            "sample_rate_hz" => rate = Some(value.trim().parse::<f64>().map_err(|e| parse_err(e.to_string()))?),
            "length" => length = Some(value.trim().parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
            other => return Err(parse_err(format!("unknown key {other:?}"))),
        }
    }
    let header = DumpHeader {
        sample_rate_hz: rate.ok_or_else(|| parse_err("missing sample_rate_hz".into()))?,
        length: length.ok_or_else(|| parse_err("missing length".into()))?,
    };
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 16 * header.length {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            msg: format!("{} bytes for {} samples", bytes.len(), header.length),
        });
    }
    let samples = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((header, samples))
}
