//! Reader and writer for the alist text format, the de-facto interchange
//! format for sparse parity-check matrices.
//!
//! Layout: a `n m` header (columns then rows), the maximum column and row
//! degrees, the per-column degrees, the per-row degrees, then one line per
//! column listing the 1-based row indices of its ones (zero-padded lines are
//! accepted and the padding ignored), and finally one line per row listing
//! the 1-based column indices. Both index lists describe the same matrix and
//! are cross-validated on read.

use std::path::Path;

use thiserror::Error;

use crate::gf2::BitMatrix;

#[derive(Debug, Error)]
pub enum AlistError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at token {index}: {message}")]
    Parse { index: usize, message: String },
    #[error("column and row index lists disagree: {0}")]
    InconsistentLists(String),
}

struct Tokens<'a> {
    items: std::str::SplitWhitespace<'a>,
    consumed: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            items: text.split_whitespace(),
            consumed: 0,
        }
    }

    fn next_usize(&mut self, what: &str) -> Result<usize, AlistError> {
        self.consumed += 1;
        let token = self.items.next().ok_or_else(|| AlistError::Parse {
            index: self.consumed,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        token.parse().map_err(|_| AlistError::Parse {
            index: self.consumed,
            message: format!("expected {what}, got {token:?}"),
        })
    }
}

pub fn parse_alist(text: &str) -> Result<BitMatrix, AlistError> {
    let mut t = Tokens::new(text);
    let n = t.next_usize("column count")?;
    let m = t.next_usize("row count")?;
    if n == 0 || m == 0 {
        return Err(AlistError::Parse {
            index: 2,
            message: "matrix dimensions must be positive".into(),
        });
    }
    let max_col = t.next_usize("maximum column degree")?;
    let max_row = t.next_usize("maximum row degree")?;
    let col_degs: Vec<usize> = (0..n)
        .map(|_| t.next_usize("column degree"))
        .collect::<Result<_, _>>()?;
    let row_degs: Vec<usize> = (0..m)
        .map(|_| t.next_usize("row degree"))
        .collect::<Result<_, _>>()?;
    if let Some(d) = col_degs.iter().find(|&&d| d > max_col) {
        return Err(AlistError::Parse {
            index: t.consumed,
            message: format!("column degree {d} exceeds declared maximum {max_col}"),
        });
    }
    if let Some(d) = row_degs.iter().find(|&&d| d > max_row) {
        return Err(AlistError::Parse {
            index: t.consumed,
            message: format!("row degree {d} exceeds declared maximum {max_row}"),
        });
    }

    let mut h = BitMatrix::zeros(m, n).map_err(|e| AlistError::Parse {
        index: 2,
        message: e.to_string(),
    })?;
    // Column lists: `max_col` entries per column when padded; accept
    // unpadded lists with exactly `deg` entries as well by reading degree
    // entries plus optional zeros. The canonical format pads, so read
    // `max_col` entries when padding is present. To support both, read
    // exactly `deg` nonzero entries, then peek zeros up to `max_col`.
    let mut read_indices = |count: usize,
                            pad_to: usize,
                            limit: usize,
                            t: &mut Tokens|
     -> Result<Vec<usize>, AlistError> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let v = t.next_usize("index entry")?;
            if v == 0 || v > limit {
                return Err(AlistError::Parse {
                    index: t.consumed,
                    message: format!("index {v} out of range 1..={limit}"),
                });
            }
            out.push(v - 1);
        }
        for _ in count..pad_to {
            let v = t.next_usize("padding entry")?;
            if v != 0 {
                return Err(AlistError::Parse {
                    index: t.consumed,
                    message: format!("expected zero padding, got {v}"),
                });
            }
        }
        Ok(out)
    };

    for (col, &deg) in col_degs.iter().enumerate() {
        for row in read_indices(deg, max_col, m, &mut t)? {
            h.set(row, col, true);
        }
    }
    let mut row_lists: Vec<Vec<usize>> = Vec::with_capacity(m);
    for &deg in &row_degs {
        let mut list = read_indices(deg, max_row, n, &mut t)?;
        list.sort_unstable();
        row_lists.push(list);
    }
    // Cross-validate the two descriptions.
    for (row, list) in row_lists.iter().enumerate() {
        let from_cols = h.row_support(row);
        if &from_cols != list {
            return Err(AlistError::InconsistentLists(format!(
                "row {row}: column list gives {from_cols:?}, row list gives {list:?}"
            )));
        }
    }
    Ok(h)
}

pub fn load_alist(path: &Path) -> Result<BitMatrix, AlistError> {
    parse_alist(&std::fs::read_to_string(path)?)
}

pub fn to_alist(h: &BitMatrix) -> String {
    let n = h.cols();
    let m = h.rows();
    let col_supports: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..m).filter(|&i| h.get(i, j)).collect())
        .collect();
    let row_supports: Vec<Vec<usize>> = (0..m).map(|i| h.row_support(i)).collect();
    let max_col = col_supports.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row_supports.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("{n} {m}\n{max_col} {max_row}\n"));
    let degrees = |s: &[Vec<usize>]| {
        s.iter()
            .map(|v| v.len().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    out.push_str(&degrees(&col_supports));
    out.push('\n');
    out.push_str(&degrees(&row_supports));
    out.push('\n');
    let padded = |support: &[usize], width: usize| {
        let mut entries: Vec<String> = support.iter().map(|i| (i + 1).to_string()).collect();
        entries.resize(width, "0".to_string());
        entries.join(" ")
    };
    for support in &col_supports {
        out.push_str(&padded(support, max_col));
        out.push('\n');
    }
    for support in &row_supports {
        out.push_str(&padded(support, max_row));
        out.push('\n');
    }
    out
}

pub fn save_alist(h: &BitMatrix, path: &Path) -> Result<(), AlistError> {
    std::fs::write(path, to_alist(h))?;
    Ok(())
}
