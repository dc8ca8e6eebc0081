//! Plain-text ensemble files.
//!
//! ```text
//! 2 2            # dimension, number of states
//! 0.5            # p_1
//! 1+0j 0+0j      # rho_1, one row per line
//! 0+0j 0+0j
//! 0.5
//! 0.5+0j 0.5+0j
//! 0.5+0j 0.5+0j
//! ```
//!
//! Blank lines and `#` comments are ignored. Entries are `re+imj`.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::info::{CMatrix, DensityMatrix, Ensemble};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse {
        line: text.lines().count(),
        message: format!("unexpected end of file, expected {what}"),
    });

    let (hl, header) = next("header `dim count`")?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [dim, count] = fields[..] else {
        return Err(parse_err(hl, format!("header needs `dim count`, got `{header}`")));
    };
    let dim: usize = dim.parse().ok().filter(|&d| d > 0).ok_or_else(|| parse_err(hl, format!("bad dimension `{dim}`")))?;
    let count: usize = count
        .parse()
        .ok()
        .filter(|&c| c > 0)
        .ok_or_else(|| parse_err(hl, format!("bad state count `{count}`")))?;

    let mut probabilities = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    let mut last_pl = hl;
    for k in 0..count {
        let (pl, p) = next(&format!("probability of state {}", k + 1))?;
        let p: f64 = p.parse().map_err(|_| parse_err(pl, format!("bad probability `{p}`")))?;
        let mut m = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            let (rl, row) = next(&format!("row {} of state {}", r + 1, k + 1))?;
            let entries: Vec<&str> = row.split_whitespace().collect();
            if entries.len() != dim {
                return Err(parse_err(rl, format!("expected {dim} entries, found {}", entries.len())));
            }
            for (c, e) in entries.iter().enumerate() {
                if !e.ends_with('j') {
                    return Err(parse_err(rl, format!("entry `{e}` is not of the form re+imj")));
                }
                m[(r, c)] = e
                    .parse::<Complex64>()
                    .map_err(|_| parse_err(rl, format!("bad complex entry `{e}`")))?;
            }
        }
        let state = DensityMatrix::new(m).map_err(|e| parse_err(pl, format!("state {}: {e}", k + 1)))?;
        probabilities.push(p);
        states.push(state);
        last_pl = pl;
    }
    if let Some((l, extra)) = lines.next() {
        return Err(parse_err(l, format!("trailing content `{extra}`")));
    }
    // Whole-ensemble checks (the sum) point at the last probability line.
    Ensemble::new(probabilities, states).map_err(|e| parse_err(last_pl, e.to_string()))
}

pub fn parse_ensemble_file(path: &Path) -> Result<Ensemble> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_ensemble(&text)
}

/// The file text for `e`, readable by [`parse_ensemble`].
pub fn format_ensemble(e: &Ensemble) -> String {
    let mut out = format!("{} {}\n", e.dim(), e.len());
    for (p, s) in e.probabilities().iter().zip(e.states()) {
        out += &format!("{p:e}\n");
        let m = s.matrix();
        for r in 0..e.dim() {
            let row: Vec<String> = (0..e.dim())
                .map(|c| {
                    let z = m[(r, c)];
                    format!("{:e}{}{:e}j", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
                })
                .collect();
            out += &row.join(" ");
            out.push('\n');
        }
    }
    out
}
