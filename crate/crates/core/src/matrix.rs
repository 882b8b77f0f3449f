//! Dense row-major matrices for vertex features and embeddings.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::reorder::Ordering;

/// Row-major dense matrix of finite `f64` values. Row `v` belongs to vertex `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

/// Per-vertex input features.
pub type FeatureMatrix = Matrix;
/// Per-vertex embeddings, one row per vertex.
pub type EmbeddingMatrix = Matrix;

impl Matrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            let (row, col) = (i.checked_div(cols).unwrap_or(0), i.checked_rem(cols).unwrap_or(0));
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {r} has {} columns, expected {cols}",
                rows[r].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    // Only for values already known to be finite.
    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Scales every non-zero row to unit L2 norm.
    pub fn normalize_rows(&mut self) {
        if self.cols == 0 {
            return;
        }
        for row in self.values.chunks_exact_mut(self.cols) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }

    /// Moves row `old` to position `ordering.new_id(old)`.
    pub fn permute_rows(&self, ordering: &Ordering) -> Result<Self> {
        if ordering.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "ordering over {} vertices applied to {} rows",
                ordering.len(),
                self.rows
            )));
        }
        let mut values = vec![0.0; self.values.len()];
        for old in 0..self.rows {
            let new = ordering.new_id(old);
            values[new * self.cols..(new + 1) * self.cols].copy_from_slice(self.row(old));
        }
        Ok(Self::from_raw(self.rows, self.cols, values))
    }

    /// Reads a TSV file with one row per vertex in id order.
    ///
    /// Blank lines are skipped. Every row must have the same number of columns
    /// and exactly `n` rows must be present.
    pub fn load_tsv(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let start = values.len();
            for tok in line.split('\t') {
                let tok = tok.trim();
                let x: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, format!("not a number: {tok:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(path, lineno, format!("non-finite value {tok:?}")));
                }
                values.push(x);
            }
            let width = values.len() - start;
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("ragged row: {width} columns, expected {c}"),
                    ))
                }
                _ => {}
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::DimensionMismatch(format!(
                "{}: {rows} rows, expected {n}",
                path.display()
            )));
        }
        Ok(Self::from_raw(rows, cols.unwrap_or(0), values))
    }

    /// Writes the matrix as TSV using shortest round-trip float formatting.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.rows {
            let mut first = true;
            for x in self.row(i) {
                if !first {
                    out.write_all(b"\t")?;
                }
                first = false;
                write!(out, "{x}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tsv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_by_two() {
        let f = tsv("1.0\t2.0\n3\t4\n-5.5\t6e-1\n");
        let m = Matrix::load_tsv(f.path(), 3).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.row(2), &[-5.5, 0.6]);
    }

    #[test]
    fn row_count_mismatch() {
        let f = tsv("1\t2\n3\t4\n");
        assert!(matches!(
            Matrix::load_tsv(f.path(), 3),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rejects_nan() {
        let f = tsv("1.0\tNaN\n");
        let err = Matrix::load_tsv(f.path(), 1).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        let f = tsv("1\t2\n3\n");
        assert!(matches!(Matrix::load_tsv(f.path(), 2), Err(Error::Parse { line: 2, .. })));
        let f = tsv("1\tx\n");
        assert!(matches!(Matrix::load_tsv(f.path(), 1), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn crlf_tolerated() {
        let f = tsv("1\t2\r\n3\t4\r\n");
        let m = Matrix::load_tsv(f.path(), 2).unwrap();
        assert_eq!(m.values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn tsv_round_trip_is_exact() {
        let m = Matrix::new(2, 2, vec![0.1, -1.0 / 3.0, 1e-300, 12345.678]).unwrap();
        let mut buf = Vec::new();
        m.write_tsv(&mut buf).unwrap();
        let f = tsv(std::str::from_utf8(&buf).unwrap());
        assert_eq!(Matrix::load_tsv(f.path(), 2).unwrap(), m);
    }

    #[test]
    fn normalize_leaves_zero_rows() {
        let mut m = Matrix::new(2, 2, vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        m.normalize_rows();
        assert_eq!(m.values(), &[0.6, 0.8, 0.0, 0.0]);
    }

    #[test]
    fn new_rejects_non_finite() {
        assert!(matches!(
            Matrix::new(1, 2, vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }
}
