//! Binary LDPC code: construction, systematic encoding, belief propagation.

mod alist;
mod bp;
mod gf2;
mod peg;

pub use alist::{read_alist, write_alist};
pub use bp::{decode_bp, BpOutput, L_MAX};

use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Column weight used by [`construct_code`].
pub const COLUMN_WEIGHT: usize = 3;
const MAX_ATTEMPTS: u64 = 32;

/// Sparse binary parity-check matrix stored by columns and by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    m: usize,
    cols: Vec<Vec<u32>>,
    rows: Vec<Vec<u32>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-column row lists.
    pub fn from_columns(m: usize, cols: Vec<Vec<u32>>) -> Result<Self> {
        let mut rows = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate() {
            for &r in col {
                if r as usize >= m {
                    return Err(Error::Construction(format!("row index {r} out of range in column {j}")));
                }
                rows[r as usize].push(j as u32);
            }
        }
        let mut cols = cols;
        for c in cols.iter_mut() {
            c.sort_unstable();
            if c.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction("repeated entry in column".into()));
            }
        }
        Ok(ParityCheckMatrix {
            n: cols.len(),
            m,
            cols,
            rows,
        })
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.cols[j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.cols
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn num_edges(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Syndrome `H c` over GF(2).
    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &j| acc ^ (bits[j as usize] & 1)))
            .collect()
    }

    /// Number of unsatisfied checks.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        self.syndrome(bits).iter().filter(|&&s| s != 0).count()
    }

    /// Applies a column relabeling: new column `t` is old column `order[t]`.
    fn permute_columns(&self, order: &[usize]) -> Self {
        let cols = order.iter().map(|&j| self.cols[j].clone()).collect();
        ParityCheckMatrix::from_columns(self.m, cols).expect("permutation preserves validity")
    }
}

/// An LDPC code in systematic form: the first `k` codeword bits are the
/// information bits, the last `m` are parity.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    k: usize,
    encoder: gf2::ParityGenerator,
}

impl LdpcCode {
    /// Wraps a full-rank parity-check matrix, reordering columns so that the
    /// code is systematic with parity on the last `m` positions.
    ///
    /// A matrix whose last `m` columns are already independent is kept as is.
    pub fn from_parity_check(h: ParityCheckMatrix) -> Result<Self> {
        let (order, encoder) = gf2::systematic_form(&h)?;
        let identity = order.iter().enumerate().all(|(a, &b)| a == b);
        let h = if identity { h } else { h.permute_columns(&order) };
        let k = h.n() - h.m();
        Ok(LdpcCode { h, k, encoder })
    }

    pub fn h(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    /// Systematic encoding; the first `k` output bits equal `info`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::Framing(format!("expected {} info bits, got {}", self.k, info.len())));
        }
        let mut cw = Vec::with_capacity(self.n());
        cw.extend(info.iter().map(|b| b & 1));
        cw.extend(self.encoder.parity(info));
        Ok(cw)
    }

    /// Sum-product decoding with at most `max_iters` iterations.
    pub fn decode(&self, llr: &[f64], max_iters: usize) -> BpOutput {
        decode_bp(&self.h, llr, max_iters)
    }
}

/// Builds a column-weight-3 PEG code of length `n` and the given rate.
///
/// Deterministic in `seed`. If a construction comes out rank deficient it is
/// retried with a derived seed.
pub fn construct_code(n: usize, target_rate: f64, seed: u64) -> Result<LdpcCode> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("block length {n} < 1000")));
    }
    if !(0.0 < target_rate && target_rate < 1.0) {
        return Err(Error::InvalidParameter(format!("rate {target_rate} outside (0, 1)")));
    }
    let m = (n as f64 * (1.0 - target_rate)).round() as usize;
    let realized = (n - m) as f64 / n as f64;
    if (realized - target_rate).abs() > 0.005 {
        return Err(Error::InvalidParameter(format!(
            "n={n} cannot realize rate {target_rate} (closest {realized})"
        )));
    }
    construct_peg(n, m, COLUMN_WEIGHT, seed)
}

/// PEG construction with explicit dimensions (no size restriction).
pub fn construct_peg(n: usize, m: usize, column_weight: usize, seed: u64) -> Result<LdpcCode> {
    if m == 0 || m >= n || column_weight == 0 || column_weight > m {
        return Err(Error::InvalidParameter(format!(
            "invalid dimensions n={n}, m={m}, column weight {column_weight}"
        )));
    }
    let mut last_err = None;
    for attempt in 0..MAX_ATTEMPTS {
        let s = if attempt == 0 { seed } else { derive_seed(seed, attempt) };
        let h = peg::progressive_edge_growth(n, m, column_weight, s);
        match LdpcCode::from_parity_check(h) {
            Ok(code) => return Ok(code),
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Construction(format!(
        "no full-rank matrix after {MAX_ATTEMPTS} attempts: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}
