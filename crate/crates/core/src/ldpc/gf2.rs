//! Dense GF(2) elimination for systematic encoding.

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Parity bits as dense GF(2) combinations of the information bits.
#[derive(Debug, Clone)]
pub(super) struct ParityGenerator {
    k: usize,
    /// One packed row of length `k` per parity bit.
    rows: Vec<Vec<u64>>,
}

impl ParityGenerator {
    pub(super) fn parity(&self, info: &[u8]) -> Vec<u8> {
        let packed = pack(info, self.k);
        self.rows
            .iter()
            .map(|row| {
                let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
                (ones & 1) as u8
            })
            .collect()
    }
}

fn pack(bits: &[u8], len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len.div_ceil(64)];
    for (j, &b) in bits.iter().enumerate().take(len) {
        if b & 1 == 1 {
            out[j / 64] |= 1 << (j % 64);
        }
    }
    out
}

/// Reduces `h` to row-echelon form choosing pivots from the rightmost columns.
///
/// Returns the column order (non-pivot columns ascending, then pivot columns
/// ascending) and the generator of the pivot (parity) bits in that order.
pub(super) fn systematic_form(h: &ParityCheckMatrix) -> Result<(Vec<usize>, ParityGenerator)> {
    let (n, m) = (h.n(), h.m());
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .map(|r| {
            let mut v = vec![0u64; words];
            for &j in r {
                v[j as usize / 64] ^= 1 << (j % 64);
            }
            v
        })
        .collect();

    let mut pivot_col = Vec::with_capacity(m);
    let mut rank = 0;
    for col in (0..n).rev() {
        if rank == m {
            break;
        }
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..m).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank);
        let (pivot, tail) = tail.split_first_mut().unwrap();
        let pivot = &*pivot;
        for row in head.iter_mut().chain(tail.iter_mut()) {
            if row[w] & b != 0 {
                row.iter_mut().zip(pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        pivot_col.push(col);
        rank += 1;
    }
    if rank < m {
        return Err(Error::Construction(format!("parity-check matrix has rank {rank} < {m}")));
    }

    let mut is_pivot = vec![false; n];
    for &c in &pivot_col {
        is_pivot[c] = true;
    }
    let info_cols: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let mut parity_cols: Vec<(usize, usize)> = pivot_col.iter().enumerate().map(|(r, &c)| (c, r)).collect();
    parity_cols.sort_unstable();

    let k = n - m;
    let gen_rows = parity_cols
        .iter()
        .map(|&(_, r)| {
            let bits: Vec<u8> = info_cols
                .iter()
                .map(|&c| ((rows[r][c / 64] >> (c % 64)) & 1) as u8)
                .collect();
            pack(&bits, k)
        })
        .collect();

    let order = info_cols.into_iter().chain(parity_cols.iter().map(|&(c, _)| c)).collect();
    Ok((order, ParityGenerator { k, rows: gen_rows }))
}
