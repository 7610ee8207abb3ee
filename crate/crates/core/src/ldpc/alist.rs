//! alist text format for sparse parity-check matrices.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based row indices of each column, zero padded>
//! <m lines: 1-based column indices of each row, zero padded>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Renders `h` in alist format.
pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let cdeg = h.column_degrees();
    let rdeg = h.row_degrees();
    let max_c = cdeg.iter().copied().max().unwrap_or(0);
    let max_r = rdeg.iter().copied().max().unwrap_or(0);
    let mut s = String::new();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    writeln!(s, "{} {}", h.n(), h.m()).unwrap();
    writeln!(s, "{max_c} {max_r}").unwrap();
    writeln!(s, "{}", join(&cdeg)).unwrap();
    writeln!(s, "{}", join(&rdeg)).unwrap();
    for (lists, width) in [(h.columns(), max_c), (h.rows(), max_r)] {
        for list in lists {
            let mut entries: Vec<usize> = list.iter().map(|&x| x as usize + 1).collect();
            entries.resize(width, 0);
            writeln!(s, "{}", join(&entries)).unwrap();
        }
    }
    s
}

/// Parses alist text. The row section is checked against the column section.
pub fn read_alist(text: &str, origin: &Path) -> Result<ParityCheckMatrix> {
    let err = |msg: String| Error::Parse {
        path: origin.to_path_buf(),
        msg,
    };
    let mut tokens = text.split_ascii_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                msg: format!("bad integer {t:?}: {e}"),
            })
    });
    let mut next = || tokens.next().unwrap_or_else(|| Err(err("unexpected end of file".into())));
    let n = next()?;
    let m = next()?;
    let max_c = next()?;
    let max_r = next()?;
    let cdeg = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let rdeg = (0..m).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let mut cols = Vec::with_capacity(n);
    for (j, &d) in cdeg.iter().enumerate() {
        let mut col = Vec::with_capacity(d);
        for slot in 0..max_c {
            let v = next()?;
            if slot < d {
                if v == 0 || v > m {
                    return Err(err(format!("column {j}: row index {v} out of range")));
                }
                col.push((v - 1) as u32);
            }
        }
        cols.push(col);
    }
    let h = ParityCheckMatrix::from_columns(m, cols)?;
    for (i, &d) in rdeg.iter().enumerate() {
        let mut row = Vec::with_capacity(d);
        for slot in 0..max_r {
            let v = next()?;
            if slot < d {
                row.push(v.wrapping_sub(1) as u32);
            }
        }
        row.sort_unstable();
        if row != h.row(i) {
            return Err(err(format!("row {i} disagrees with the column section")));
        }
    }
    Ok(h)
}
