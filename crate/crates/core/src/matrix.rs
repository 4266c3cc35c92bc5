//! Column-major dense matrices in double precision.
//!
//! This is the only numeric container in the toolkit. Storage is column
//! major: element `(i, j)` lives at offset `j * rows + i`, which matches the
//! packing order used by the distributed layers when they slice, gather and
//! redistribute blocks.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Wraps an existing column-major buffer. Panics if the length is not
    /// `rows * cols`; callers construct the buffer, so a mismatch is a bug.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "column-major buffer length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        DenseMatrix { rows, cols, data }
    }

    /// Builds a matrix row by row, mostly useful in tests and file parsing.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = DenseMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged row {i} in from_rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    /// The column-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `self - other`, used for residual norms.
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CoreError::DimensionMismatch {
                op: "sub",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Relative Frobenius distance `||self - other||_F / ||self||_F`.
    pub fn relative_frobenius_distance(&self, other: &DenseMatrix) -> Result<f64> {
        let diff = self.sub(other)?;
        let denom = self.frobenius_norm();
        if denom == 0.0 {
            return Ok(diff.frobenius_norm());
        }
        Ok(diff.frobenius_norm() / denom)
    }

    /// Extracts the sub-matrix at `(row_start, col_start)` of shape
    /// `rows x cols`.
    pub fn block(&self, row_start: usize, col_start: usize, rows: usize, cols: usize) -> DenseMatrix {
        assert!(row_start + rows <= self.rows && col_start + cols <= self.cols);
        DenseMatrix::from_fn(rows, cols, |i, j| self.get(row_start + i, col_start + j))
    }

    /// Writes `block` into place at `(row_start, col_start)`.
    pub fn set_block(&mut self, row_start: usize, col_start: usize, block: &DenseMatrix) {
        assert!(row_start + block.rows <= self.rows && col_start + block.cols <= self.cols);
        for j in 0..block.cols {
            for i in 0..block.rows {
                self.set(row_start + i, col_start + j, block.get(i, j));
            }
        }
    }
}

/// Classical triple-loop product `op(A) * B` where `op` optionally
/// transposes `A`. Accumulation over the contracted index runs in ascending
/// order for every output element, so repeated runs and independent
/// implementations that use the same ordering agree bit for bit.
pub fn gemm(a: &DenseMatrix, b: &DenseMatrix, transpose_a: bool) -> Result<DenseMatrix> {
    let (m, inner_a) = if transpose_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    if inner_a != b.rows {
        return Err(CoreError::DimensionMismatch {
            op: if transpose_a { "gemm(A^T B)" } else { "gemm" },
            left_rows: m,
            left_cols: inner_a,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let n = b.cols;
    let mut c = DenseMatrix::zeros(m, n);
    if transpose_a {
        for j in 0..n {
            for i in 0..m {
                let mut acc = 0.0;
                // column i of A is contiguous, as is column j of B
                let ca = a.column(i);
                let cb = b.column(j);
                for k in 0..inner_a {
                    acc += ca[k] * cb[k];
                }
                c.set(i, j, acc);
            }
        }
    } else {
        for j in 0..n {
            let cb = b.column(j);
            let cc = &mut c.data[j * m..(j + 1) * m];
            for k in 0..inner_a {
                let ca = &a.data[k * m..(k + 1) * m];
                let bkj = cb[k];
                for i in 0..m {
                    cc[i] += ca[i] * bkj;
                }
            }
        }
    }
    Ok(c)
}
