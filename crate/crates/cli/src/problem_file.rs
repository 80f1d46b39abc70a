//! Labelled plain-text problem files.
//!
//! ```text
//! # comment
//! n 4
//! B
//! 1 0 0 0
//! ...
//! Bprime
//! ...
//! w 1 0 0 0
//! ```
//!
//! A label may carry its first row on the same line. Entries are integers
//! or `p/q` rationals; `w` must be integral.

use std::collections::HashMap;
use std::fmt;

use superlat_core::linalg::parse_rational;
use superlat_core::{QMatrix, QVector, Rational};

const LABELS: [&str; 6] = ["n", "B", "Bprime", "w", "z0", "phi"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: Option<usize>, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    pub n: usize,
    pub b: QMatrix,
    pub bprime: Option<QMatrix>,
    pub w: Option<QVector>,
    pub z0: Option<Vec<QVector>>,
    pub phi: Option<QMatrix>,
}

type Row = (usize, Vec<Rational>);

fn parse_row(line_no: usize, tokens: &[&str]) -> Result<Vec<Rational>, ParseError> {
    tokens
        .iter()
        .map(|t| parse_rational(t).ok_or_else(|| err(Some(line_no), format!("not a rational: {t:?}"))))
        .collect()
}

fn split_blocks(text: &str) -> Result<HashMap<String, (usize, Vec<Row>)>, ParseError> {
    let mut blocks: HashMap<String, (usize, Vec<Row>)> = HashMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (label, rest) = if LABELS.contains(&tokens[0]) {
            (Some(tokens[0]), &tokens[1..])
        } else if tokens[0].chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(err(Some(line_no), format!("unknown label {:?}", tokens[0])));
        } else {
            (None, &tokens[..])
        };
        if let Some(label) = label {
            if blocks.contains_key(label) {
                return Err(err(Some(line_no), format!("duplicate block {label:?}")));
            }
            blocks.insert(label.to_string(), (line_no, Vec::new()));
            current = Some(label.to_string());
        }
        if rest.is_empty() {
            continue;
        }
        let Some(cur) = &current else {
            return Err(err(Some(line_no), "data before the first label"));
        };
        let row = parse_row(line_no, rest)?;
        blocks.get_mut(cur).expect("current block exists").1.push((line_no, row));
    }
    Ok(blocks)
}

fn square_block(name: &str, n: usize, start: usize, rows: &[Row]) -> Result<QMatrix, ParseError> {
    if rows.len() != n {
        return Err(err(Some(start), format!("{name}: expected {n} rows, found {}", rows.len())));
    }
    for (line, row) in rows {
        if row.len() != n {
            return Err(err(Some(*line), format!("{name}: expected {n} entries, found {}", row.len())));
        }
    }
    QMatrix::from_rows(rows.iter().map(|(_, r)| r.clone()).collect()).map_err(|e| err(Some(start), e.to_string()))
}

fn gram_block(name: &str, n: usize, start: usize, rows: &[Row]) -> Result<QMatrix, ParseError> {
    let m = square_block(name, n, start, rows)?;
    if !m.is_symmetric() {
        return Err(err(Some(start), format!("{name} is not symmetric")));
    }
    Ok(m)
}

/// Parses an integral vector given as a block row or as a `--w` style
/// comma/space separated list.
pub fn parse_anchor(n: usize, entries: &[Rational], line: Option<usize>) -> Result<QVector, ParseError> {
    if entries.len() != n {
        return Err(err(line, format!("w: expected {n} entries, found {}", entries.len())));
    }
    let v = QVector::new(entries.to_vec());
    if !v.is_integral() {
        return Err(err(line, "w must have integer entries"));
    }
    if v.is_zero() {
        return Err(err(line, "w must be nonzero"));
    }
    Ok(v)
}

/// `"1,0,0,0"` or `"1 0 0 0"`.
pub fn parse_list(s: &str) -> Result<Vec<Rational>, ParseError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t).ok_or_else(|| err(None, format!("not a rational: {t:?}"))))
        .collect()
}

/// A bare matrix: one row per non-comment line.
pub fn parse_matrix(text: &str) -> Result<QMatrix, ParseError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        rows.push((idx + 1, parse_row(idx + 1, &tokens)?));
    }
    let n = rows.len();
    if n == 0 {
        return Err(err(None, "empty matrix"));
    }
    square_block("phi", n, rows[0].0, &rows)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let blocks = split_blocks(text)?;
    let block = |name: &str| blocks.get(name);

    let b_block = block("B").ok_or_else(|| err(None, "missing block B"))?;
    let n = match block("n") {
        Some((line, rows)) => {
            let [(_, row)] = rows.as_slice() else {
                return Err(err(Some(*line), "n: expected a single value"));
            };
            let value = match row.as_slice() {
                [v] if v.is_integer() => v.to_integer(),
                _ => return Err(err(Some(*line), "n: expected a single integer")),
            };
            usize::try_from(value).map_err(|_| err(Some(*line), "n must be a positive integer"))?
        }
        None => b_block.1.len(),
    };
    if n < 2 {
        return Err(err(None, format!("n must be at least 2, found {n}")));
    }

    let b = gram_block("B", n, b_block.0, &b_block.1)?;
    let bprime = block("Bprime")
        .map(|(start, rows)| gram_block("Bprime", n, *start, rows))
        .transpose()?;
    let phi = block("phi")
        .map(|(start, rows)| square_block("phi", n, *start, rows))
        .transpose()?;
    let w = match block("w") {
        Some((start, rows)) => {
            let entries: Vec<Rational> = rows.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
            Some(parse_anchor(n, &entries, Some(*start))?)
        }
        None => None,
    };
    let z0 = match block("z0") {
        Some((start, rows)) => {
            if rows.len() != n - 1 {
                return Err(err(Some(*start), format!("z0: expected {} rows, found {}", n - 1, rows.len())));
            }
            let mut out = Vec::with_capacity(rows.len());
            for (line, row) in rows {
                if row.len() != n {
                    return Err(err(Some(*line), format!("z0: expected {n} entries, found {}", row.len())));
                }
                out.push(QVector::new(row.clone()));
            }
            Some(out)
        }
        None => None,
    };
    Ok(ProblemFile {
        n,
        b,
        bprime,
        w,
        z0,
        phi,
    })
}
