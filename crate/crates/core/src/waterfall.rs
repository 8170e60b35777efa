//! Waterfall matrix data model: a dense time × distance amplitude grid with
//! sampling metadata. Rows are time samples (`dt` seconds apart), columns are
//! fiber channels (`dx` meters apart). Values are stored row-major.

use alloc::vec::Vec;

use crate::error::{CoreError, CoreResult};

/// Dense time × distance amplitude matrix.
///
/// Immutable after construction; all operations return new matrices.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaterfallMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    /// Seconds per row.
    pub dt: f64,
    /// Meters per column.
    pub dx: f64,
    /// Epoch seconds of row 0.
    pub t0: f64,
    /// Meters of column 0.
    pub x0: f64,
}

/// Half-open row/column window into a waterfall matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSelector {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
}

/// Block reducer for time decimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Reducer {
    Mean,
    Max,
}

impl WaterfallMatrix {
    /// Builds a matrix from row-major values, validating shape and finiteness.
    pub fn new(
        values: Vec<f64>,
        rows: usize,
        cols: usize,
        dt: f64,
        dx: f64,
        t0: f64,
        x0: f64,
    ) -> CoreResult<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(CoreError::EmptyMatrix { rows, cols });
        }
        if !(dt > 0.0) || !(dx > 0.0) {
            return Err(CoreError::BadSampling { dt, dx });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteValue {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            values,
            rows,
            cols,
            dt,
            dx,
            t0,
            x0,
        })
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

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.values[row * self.cols + col]
    }

    /// Borrow one time row (all channels at a given instant).
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    /// Copy one distance column (time series of a single channel).
    pub fn column(&self, col: usize) -> CoreResult<Vec<f64>> {
        if col >= self.cols {
            return Err(CoreError::ColumnOutOfRange {
                col,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).map(|r| self.at(r, col)).collect())
    }

    /// Global (min, max) over all values.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        (lo, hi)
    }

    /// Rebuilds with the same metadata but new values of identical shape.
    pub fn with_values(&self, values: Vec<f64>) -> CoreResult<Self> {
        Self::new(values, self.rows, self.cols, self.dt, self.dx, self.t0, self.x0)
    }

    /// Extracts the submatrix selected by `w`, shifting `t0`/`x0` accordingly.
    pub fn crop(&self, w: &WindowSelector) -> CoreResult<Self> {
        w.validate(self.rows, self.cols)?;
        let rows = w.row_end - w.row_start;
        let cols = w.col_end - w.col_start;
        let mut values = Vec::with_capacity(rows * cols);
        for r in w.row_start..w.row_end {
            values.extend_from_slice(&self.values[r * self.cols + w.col_start..r * self.cols + w.col_end]);
        }
        Self::new(
            values,
            rows,
            cols,
            self.dt,
            self.dx,
            self.t0 + w.row_start as f64 * self.dt,
            self.x0 + w.col_start as f64 * self.dx,
        )
    }

    /// Reduces each block of `factor` consecutive rows to one output row.
    ///
    /// Output has `floor(rows / factor)` rows and `dt * factor` row spacing;
    /// a trailing partial block is dropped.
    pub fn decimate_time(&self, factor: usize, reducer: Reducer) -> CoreResult<Self> {
        if factor < 1 {
            return Err(CoreError::BadDecimation);
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let out_rows = self.rows / factor;
        if out_rows == 0 {
            return Err(CoreError::EmptyMatrix {
                rows: out_rows,
                cols: self.cols,
            });
        }
        let mut values = Vec::with_capacity(out_rows * self.cols);
        for block in 0..out_rows {
            for c in 0..self.cols {
                let mut acc = match reducer {
                    Reducer::Mean => 0.0,
                    Reducer::Max => f64::NEG_INFINITY,
                };
                for r in block * factor..(block + 1) * factor {
                    let v = self.at(r, c);
                    match reducer {
                        Reducer::Mean => acc += v,
                        Reducer::Max => acc = acc.max(v),
                    }
                }
                if let Reducer::Mean = reducer {
                    acc /= factor as f64;
                }
                values.push(acc);
            }
        }
        Self::new(
            values,
            out_rows,
            self.cols,
            self.dt * factor as f64,
            self.dx,
            self.t0,
            self.x0,
        )
    }

    /// Absolute time of a row index.
    pub fn row_time(&self, row: usize) -> f64 {
        self.t0 + row as f64 * self.dt
    }

    /// Absolute position of a column index.
    pub fn col_position(&self, col: usize) -> f64 {
        self.x0 + col as f64 * self.dx
    }
}

impl WindowSelector {
    pub fn new(row_start: usize, row_end: usize, col_start: usize, col_end: usize) -> Self {
        Self {
            row_start,
            row_end,
            col_start,
            col_end,
        }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self::new(0, rows, 0, cols)
    }

    fn validate(&self, rows: usize, cols: usize) -> CoreResult<()> {
        if self.row_start >= self.row_end || self.row_end > rows {
            return Err(CoreError::WindowOutOfBounds {
                start: self.row_start,
                end: self.row_end,
                extent: rows,
            });
        }
        if self.col_start >= self.col_end || self.col_end > cols {
            return Err(CoreError::WindowOutOfBounds {
                start: self.col_start,
                end: self.col_end,
                extent: cols,
            });
        }
        Ok(())
    }
}
