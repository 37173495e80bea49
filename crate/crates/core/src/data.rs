//! The predictor matrix and paired response under diagnosis.

use crate::error::{HidetifyError, Result};

/// Smallest number of rows accepted by [`DataMatrix::new`].
pub const MIN_ROWS: usize = 4;

/// An `n × p` predictor matrix with a length-`n` response.
///
/// Values are stored column-major so that per-predictor sweeps read
/// contiguous memory. Row and column indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    response: Vec<f64>,
}

impl DataMatrix {
    /// Build from column-major `values` (`values[j * n + i]` is row `i`, column `j`).
    pub fn new(n: usize, p: usize, values: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        if n < MIN_ROWS {
            return Err(HidetifyError::InvalidData(format!(
                "need at least {MIN_ROWS} rows, got {n}"
            )));
        }
        if p == 0 {
            return Err(HidetifyError::InvalidData(
                "need at least one predictor".into(),
            ));
        }
        if values.len() != n * p {
            return Err(HidetifyError::LengthMismatch {
                expected: n * p,
                actual: values.len(),
            });
        }
        if response.len() != n {
            return Err(HidetifyError::LengthMismatch {
                expected: n,
                actual: response.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(HidetifyError::InvalidData(format!(
                "non-finite predictor at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(HidetifyError::InvalidData(format!(
                "non-finite response at row {i}"
            )));
        }
        Ok(Self {
            n,
            p,
            values,
            response,
        })
    }

    /// Build from row vectors of equal length.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(HidetifyError::InvalidData(format!(
                "row {bad} has {} values, expected {p}",
                rows[bad].len()
            )));
        }
        let mut values = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        Self::new(n, p, values, response)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.get(i, j)).collect()
    }

    /// A new matrix containing only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * self.p);
        for col in self.columns() {
            values.extend(rows.iter().map(|&i| col[i]));
        }
        let response = rows.iter().map(|&i| self.response[i]).collect();
        Self::new(rows.len(), self.p, values, response)
    }

    /// A new matrix with every row except those in `drop`.
    pub fn without_rows(&self, drop: &[usize]) -> Result<Self> {
        let mut keep = vec![true; self.n];
        for &i in drop {
            if i < self.n {
                keep[i] = false;
            }
        }
        let rows: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        self.select_rows(&rows)
    }

    /// A new matrix restricted to the listed predictor columns.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(cols.len() * self.n);
        for &j in cols {
            values.extend_from_slice(self.column(j));
        }
        Self::new(self.n, cols.len(), values, self.response.clone())
    }

    pub(crate) fn set_row(&mut self, i: usize, predictors: &[f64], response: f64) {
        debug_assert_eq!(predictors.len(), self.p);
        for (j, &v) in predictors.iter().enumerate() {
            self.values[j * self.n + i] = v;
        }
        self.response[i] = response;
    }
}
