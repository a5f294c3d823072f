//! Dense real matrix carrier and the shared comma-separated text format.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An `m × n` real matrix with finite entries.
///
/// Thin wrapper around [`DMatrix<f64>`] that guarantees a non-empty shape and
/// no NaN/Inf. Values are immutable once built; use [`DenseMatrix::as_mat`]
/// for arithmetic and [`DenseMatrix::new`] to wrap a result.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() == 0 || mat.ncols() == 0 {
            return Err(Error::Empty);
        }
        for j in 0..mat.ncols() {
            for i in 0..mat.nrows() {
                if !mat[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(mat))
    }

    /// Builds from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
            return Err(Error::Parse {
                line: bad + 1,
                msg: format!("expected {ncols} entries, found {}", rows[bad].len()),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(nrows, ncols, &flat)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_mat(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(&self.0 * c)
    }

    pub(crate) fn ensure_shape(&self, shape: (usize, usize)) -> Result<()> {
        if self.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: self.shape(),
            });
        }
        Ok(())
    }

    /// Serializes one row per line, entries separated by single commas,
    /// each printed with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows() * self.cols() * 24);
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", self.0[(i, j)]).expect("write to String");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the comma-separated format. Blank lines are ignored; every
    /// non-blank line must have the same number of entries.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut width = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        msg: format!("{tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("expected {w} entries, found {}", row.len()),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        Self::from_rows(&rows)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn read_from(path: impl AsRef<Path>) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse_text(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

impl TryFrom<DMatrix<f64>> for DenseMatrix {
    type Error = Error;

    fn try_from(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(mat)
    }
}

impl From<DenseMatrix> for DMatrix<f64> {
    fn from(m: DenseMatrix) -> Self {
        m.0
    }
}

impl AsRef<DMatrix<f64>> for DenseMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}
