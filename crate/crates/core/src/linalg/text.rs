//! Plain-text matrix format.
//!
//! ```text
//! 2 2
//! 1.0000000000000000e0:0.0000000000000000e0 0.0000000000000000e0:-1.0000000000000000e0
//! 3.5000000000000000e0:2.0000000000000000e0 0.0000000000000000e0:0.0000000000000000e0
//! ```
//!
//! The first line holds `rows cols`; each following line holds one row of
//! `re:im` tokens. Values are written with 17 significant digits so the
//! round trip is exact. Blank lines and lines starting with `#` are skipped.
//! Vectors are stored as `n 1` matrices.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

fn parse_err(line: usize, message: impl Into<String>) -> LinalgError {
    LinalgError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_scalar(token: &str, line: usize) -> Result<Complex64, LinalgError> {
    let (re, im) = token
        .split_once(':')
        .ok_or_else(|| parse_err(line, format!("expected re:im, got {token:?}")))?;
    let re: f64 = re
        .parse()
        .map_err(|_| parse_err(line, format!("bad real part {re:?}")))?;
    let im: f64 = im
        .parse()
        .map_err(|_| parse_err(line, format!("bad imaginary part {im:?}")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(parse_err(line, "non-finite entry"));
    }
    Ok(Complex64::new(re, im))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, LinalgError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(header_line, "header must be `rows cols`"))?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(header_line, "header must be `rows cols`"));
    };
    if rows == 0 || cols == 0 {
        return Err(parse_err(header_line, "dimensions must be positive"));
    }

    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {rows} rows, found {}", data.len() / cols)))?;
        let before = data.len();
        for token in line.split_whitespace() {
            data.push(parse_scalar(token, n)?);
        }
        if data.len() - before != cols {
            return Err(parse_err(
                n,
                format!("expected {cols} entries, found {}", data.len() - before),
            ));
        }
    }
    if let Some((n, _)) = lines.next() {
        return Err(parse_err(n, "trailing data after last row"));
    }
    ComplexMatrix::from_vec(rows, cols, data)
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        let line: Vec<String> = m
            .row(i)
            .iter()
            .map(|z| format!("{:.16e}:{:.16e}", z.re, z.im))
            .collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

/// Parses an `n 1` matrix as a vector.
pub fn parse_vector(text: &str) -> Result<Vec<Complex64>, LinalgError> {
    let m = parse_matrix(text)?;
    if m.cols() != 1 {
        return Err(parse_err(1, format!("vector must have 1 column, found {}", m.cols())));
    }
    Ok(m.data().to_vec())
}

pub fn format_vector(v: &[Complex64]) -> String {
    format_matrix(&ComplexMatrix::column_vector(v))
}
