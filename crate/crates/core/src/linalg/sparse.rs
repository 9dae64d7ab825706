use crate::{Error, Real, Result};

use super::DenseMatrix;

/// Sparse matrix in compressed sparse row layout.
///
/// Entries are stored sorted by `(row, col)` and every kernel traverses them
/// in that order, so results are reproducible bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds from `(row, col, value)` triplets in any order.
    ///
    /// Rejects out-of-range indices, duplicate coordinates and non-finite
    /// values. Explicit zeros are kept.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, T)> = triplets.into_iter().collect();
        for &(r, c, v) in &entries {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfBounds {
                    op: "SparseMatrix::from_triplets",
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    op: "SparseMatrix::from_triplets",
                    row: r,
                    col: c,
                });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::DuplicateEntry {
                    op: "SparseMatrix::from_triplets",
                    row: pair[0].0,
                    col: pair[0].1,
                });
            }
        }

        let mut row_ptr = vec![0usize; nrows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = entries.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Dense-as-sparse: stores every entry of `m`, including zeros.
    pub fn from_dense(m: &DenseMatrix<T>) -> Self {
        let nrows = m.nrows();
        let ncols = m.ncols();
        let row_ptr = (0..=nrows).map(|i| i * ncols).collect();
        let col_idx = (0..nrows).flat_map(|_| 0..ncols).collect();
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values: m.values().to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        if self.nrows == 0 || self.ncols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.nrows as f64 * self.ncols as f64)
    }

    /// Stored entries in `(row, col)` order.
    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter_entries() {
            out[(r, c)] = v;
        }
        out
    }

    pub fn frob_norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    /// `self * m` (`transpose = false`) or `selfᵀ * m` (`transpose = true`).
    ///
    /// Touches each stored entry exactly once, in storage order.
    pub fn spmm(&self, m: &DenseMatrix<T>, transpose: bool) -> Result<DenseMatrix<T>> {
        let inner = if transpose { self.nrows } else { self.ncols };
        let outer = if transpose { self.ncols } else { self.nrows };
        if m.nrows() != inner {
            return Err(Error::dims(
                "SparseMatrix::spmm",
                format!("{} rows in dense operand", inner),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        let mut out = DenseMatrix::zeros(outer, m.ncols());
        if transpose {
            for r in 0..self.nrows {
                let m_row = m.row(r);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    let v = self.values[k];
                    let out_row = out.row_mut(self.col_idx[k]);
                    for (o, &x) in out_row.iter_mut().zip(m_row) {
                        *o = *o + v * x;
                    }
                }
            }
        } else {
            for r in 0..self.nrows {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    let v = self.values[k];
                    let m_row = m.row(self.col_idx[k]);
                    let out_row = out.row_mut(r);
                    for (o, &x) in out_row.iter_mut().zip(m_row) {
                        *o = *o + v * x;
                    }
                }
            }
        }
        Ok(out)
    }
}
