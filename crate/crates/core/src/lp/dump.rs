//! Plain-text listing of a [`LinearProgram`] for cross-checking with other solvers.
//!
//! ```text
//! cilp-lp 1
//! sense min
//! vars 3
//! obj 0 1
//! eq 0 : 0 -1 1 2
//! range 0.9999 1 : 0 1 1 1 2 1
//! range -inf 13 : 1 1 2 8
//! end
//! ```
//!
//! One directive per line, tokens separated by ASCII whitespace. `obj`
//! lines list non-zero objective coefficients. Row lines give the bounds,
//! a `:` separator, then `index value` pairs. Numbers use Rust's shortest
//! round-trip formatting; `inf` and `-inf` mark absent bounds. Lines
//! starting with `#` are comments. See `docs/lp-dump.md` for the full grammar.

use super::{EqualityRow, LinearProgram, RangeRow, Sense};
use std::fmt::Write as _;
use thiserror::Error;

pub const DUMP_HEADER: &str = "cilp-lp 1";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct DumpError {
    pub line: usize,
    pub message: String,
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

pub fn write_dump(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{DUMP_HEADER}");
    let sense = match lp.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let _ = writeln!(out, "sense {sense}");
    let _ = writeln!(out, "vars {}", lp.n_vars);
    for (j, c) in lp.objective.iter().enumerate() {
        if *c != 0.0 {
            let _ = writeln!(out, "obj {j} {}", fmt_num(*c));
        }
    }
    let pairs = |coeffs: &[(usize, f64)]| {
        coeffs
            .iter()
            .map(|(j, a)| format!(" {j} {}", fmt_num(*a)))
            .collect::<String>()
    };
    for row in &lp.equalities {
        let _ = writeln!(out, "eq {} :{}", fmt_num(row.rhs), pairs(&row.coeffs));
    }
    for row in &lp.ranges {
        let _ = writeln!(
            out,
            "range {} {} :{}",
            fmt_num(row.lower),
            fmt_num(row.upper),
            pairs(&row.coeffs)
        );
    }
    out.push_str("end\n");
    out
}

/// Parses a dump and validates the resulting program.
pub fn parse_dump(text: &str) -> Result<LinearProgram, DumpError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let err = |line: usize, message: String| DumpError { line, message };

    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty input".into()))?;
    if header != DUMP_HEADER {
        return Err(err(ln, format!("expected header `{DUMP_HEADER}`")));
    }
    let (ln, sense_line) = lines.next().ok_or_else(|| err(ln, "missing `sense`".into()))?;
    let sense = match sense_line.split_ascii_whitespace().collect::<Vec<_>>().as_slice() {
        ["sense", "min"] => Sense::Minimize,
        ["sense", "max"] => Sense::Maximize,
        _ => return Err(err(ln, "expected `sense min` or `sense max`".into())),
    };
    let (ln, vars_line) = lines.next().ok_or_else(|| err(ln, "missing `vars`".into()))?;
    let n_vars = match vars_line.split_ascii_whitespace().collect::<Vec<_>>().as_slice() {
        ["vars", n] => n
            .parse::<usize>()
            .map_err(|_| err(ln, format!("bad variable count `{n}`")))?,
        _ => return Err(err(ln, "expected `vars N`".into())),
    };
    // Guard against absurd allocations from untrusted input.
    if n_vars > 10_000_000 {
        return Err(err(ln, "variable count too large".into()));
    }
    let mut lp = LinearProgram::new(n_vars, sense);

    let num = |ln: usize, tok: &str| -> Result<f64, DumpError> {
        let v: f64 = tok
            .parse()
            .map_err(|_| err(ln, format!("bad number `{tok}`")))?;
        if v.is_nan() {
            return Err(err(ln, "NaN is not allowed".into()));
        }
        Ok(v)
    };
    let index = |ln: usize, tok: &str| -> Result<usize, DumpError> {
        let j: usize = tok
            .parse()
            .map_err(|_| err(ln, format!("bad index `{tok}`")))?;
        if j >= n_vars {
            return Err(err(ln, format!("index {j} out of range")));
        }
        Ok(j)
    };
    let coeffs = |ln: usize, toks: &[&str]| -> Result<Vec<(usize, f64)>, DumpError> {
        if toks.len() % 2 != 0 {
            return Err(err(ln, "coefficients must come in `index value` pairs".into()));
        }
        toks.chunks(2)
            .map(|p| Ok((index(ln, p[0])?, num(ln, p[1])?)))
            .collect()
    };

    let mut ended = false;
    for (ln, line) in lines.by_ref() {
        let toks: Vec<&str> = line.split_ascii_whitespace().collect();
        match toks.as_slice() {
            ["end"] => {
                ended = true;
                break;
            }
            ["obj", j, v] => {
                let j = index(ln, j)?;
                lp.objective[j] = num(ln, v)?;
            }
            ["eq", rhs, ":", rest @ ..] => {
                lp.equalities.push(EqualityRow {
                    rhs: num(ln, rhs)?,
                    coeffs: coeffs(ln, rest)?,
                });
            }
            ["range", lo, hi, ":", rest @ ..] => {
                lp.ranges.push(RangeRow {
                    lower: num(ln, lo)?,
                    upper: num(ln, hi)?,
                    coeffs: coeffs(ln, rest)?,
                });
            }
            _ => return Err(err(ln, format!("unrecognised directive `{line}`"))),
        }
    }
    if !ended {
        return Err(err(text.lines().count(), "missing `end`".into()));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "content after `end`".into()));
    }
    lp.validate().map_err(|e| err(0, e.to_string()))?;
    Ok(lp)
}
