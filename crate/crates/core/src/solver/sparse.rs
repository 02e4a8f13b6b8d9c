//! Column-compressed storage for the constraint matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::milp::model::Row;

/// Immutable CSC matrix. Row indices within a column are ascending.
#[derive(Debug, Clone)]
pub struct CscMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    /// Builds the structural matrix from model rows (row-major triplets).
    pub fn from_rows(rows: &[Row], n_cols: usize) -> CscMatrix {
        let mut count = vec![0usize; n_cols];
        for row in rows {
            for &(col, _) in &row.coeffs {
                count[col] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n_cols + 1];
        for j in 0..n_cols {
            col_ptr[j + 1] = col_ptr[j] + count[j];
        }
        let nnz = col_ptr[n_cols];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut cursor = col_ptr.clone();
        for (i, row) in rows.iter().enumerate() {
            for &(col, coef) in &row.coeffs {
                let at = cursor[col];
                row_idx[at] = i;
                values[at] = coef;
                cursor[col] += 1;
            }
        }
        CscMatrix { n_rows: rows.len(), n_cols, col_ptr, row_idx, values }
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let s = self.col_ptr[j];
        let e = self.col_ptr[j + 1];
        (&self.row_idx[s..e], &self.values[s..e])
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Scales in place: `a_ij <- a_ij * row_scale[i] * col_scale[j]`.
    pub fn scale(&mut self, row_scale: &[f64], col_scale: &[f64]) {
        for j in 0..self.n_cols {
            let s = self.col_ptr[j];
            let e = self.col_ptr[j + 1];
            for k in s..e {
                self.values[k] *= row_scale[self.row_idx[k]] * col_scale[j];
            }
        }
    }

    /// Sparse dot of column `j` with a dense vector.
    pub fn col_dot(&self, j: usize, dense: &[f64]) -> f64 {
        let (rows, vals) = self.col(j);
        rows.iter().zip(vals).map(|(&i, &v)| v * dense[i]).sum()
    }

    /// Adds `factor * column j` into a dense vector.
    pub fn col_axpy(&self, j: usize, factor: f64, dense: &mut [f64]) {
        let (rows, vals) = self.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            dense[i] += factor * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::{RowMeta, RowSense};
    use alloc::vec;

    fn row(coeffs: Vec<(usize, f64)>) -> Row {
        Row { coeffs, sense: RowSense::Le, rhs: 0.0, meta: RowMeta::Free }
    }

    #[test]
    fn csc_round_trip() {
        let rows = vec![
            row(vec![(0, 1.0), (2, -3.0)]),
            row(vec![(1, 2.0)]),
            row(vec![(0, 4.0), (1, 5.0), (2, 6.0)]),
        ];
        let m = CscMatrix::from_rows(&rows, 3);
        assert_eq!(m.nnz(), 6);
        let (r, v) = m.col(0);
        assert_eq!(r, &[0, 2]);
        assert_eq!(v, &[1.0, 4.0]);
        let (r, v) = m.col(2);
        assert_eq!(r, &[0, 2]);
        assert_eq!(v, &[-3.0, 6.0]);
        assert_eq!(m.col_dot(1, &[1.0, 10.0, 100.0]), 2.0 * 10.0 + 5.0 * 100.0);
        let mut acc = vec![0.0; 3];
        m.col_axpy(0, 2.0, &mut acc);
        assert_eq!(acc, vec![2.0, 0.0, 8.0]);
    }
}
