//! Plain-text matrix and dataset files.
//!
//! One matrix is a header line `rows cols` followed by `rows` lines of
//! whitespace-separated entries in row-major order, written with shortest
//! round-trip formatting. A dataset file is two matrix blocks back to back:
//! the input `X`, then the output `Y`. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::model::{Dataset, ModelError};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("read failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse failure: {0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Serializes one matrix block.
pub fn format_matrix<T: Scalar>(m: &Matrix<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Serializes a dataset as two matrix blocks (`X`, then `Y`).
pub fn format_dataset<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>) -> String {
    format!("{}{}", format_matrix(x), format_matrix(y))
}

struct Tokens<'a> {
    iter: std::vec::IntoIter<&'a str>,
    consumed: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let toks: Vec<&str> = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
            .collect();
        Self { iter: toks.into_iter(), consumed: 0 }
    }

    fn next(&mut self) -> Result<&'a str, FixtureError> {
        self.consumed += 1;
        self.iter
            .next()
            .ok_or_else(|| FixtureError::Parse(format!("unexpected end of input at token {}", self.consumed)))
    }

    fn usize(&mut self) -> Result<usize, FixtureError> {
        let tok = self.next()?;
        tok.parse().map_err(|_| FixtureError::Parse(format!("expected a dimension, got {tok:?}")))
    }

    fn scalar<T: Scalar>(&mut self) -> Result<T, FixtureError> {
        let tok = self.next()?;
        let v: f64 =
            tok.parse().map_err(|_| FixtureError::Parse(format!("expected a number, got {tok:?}")))?;
        if !v.is_finite() {
            return Err(FixtureError::Parse(format!("non-finite entry {tok:?}")));
        }
        Ok(T::real(v))
    }

    fn matrix<T: Scalar>(&mut self) -> Result<Matrix<T>, FixtureError> {
        let rows = self.usize()?;
        let cols = self.usize()?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.scalar()?);
        }
        Ok(Matrix::from_vec(rows, cols, data)?)
    }

    fn finished(&mut self) -> Result<(), FixtureError> {
        if self.iter.next().is_some() {
            return Err(FixtureError::Parse("trailing tokens after final block".into()));
        }
        Ok(())
    }
}

/// Parses a single matrix block.
pub fn parse_matrix<T: Scalar>(text: &str) -> Result<Matrix<T>, FixtureError> {
    let mut toks = Tokens::new(text);
    let m = toks.matrix()?;
    toks.finished()?;
    Ok(m)
}

/// Parses a dataset file (two matrix blocks) into its raw matrices.
pub fn parse_dataset<T: Scalar>(text: &str) -> Result<(Matrix<T>, Matrix<T>), FixtureError> {
    let mut toks = Tokens::new(text);
    let x = toks.matrix()?;
    let y = toks.matrix()?;
    toks.finished()?;
    Ok((x, y))
}

/// Loads and validates a dataset file from disk.
pub fn load_dataset<T: Scalar>(path: &Path) -> Result<Dataset<T>, FixtureError> {
    let text = std::fs::read_to_string(path)?;
    let (x, y) = parse_dataset(&text)?;
    Ok(Dataset::new(x, y)?)
}
