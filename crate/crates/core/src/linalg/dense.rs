use std::ops::{Index, IndexMut};

use crate::{Error, Real, Result};

/// Dense matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    values: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix {
            nrows,
            ncols,
            values: vec![T::zero(); nrows * ncols],
        }
    }

    /// Rectangular identity: ones on the main diagonal, zeros elsewhere.
    pub fn eye(nrows: usize, ncols: usize) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows.min(ncols) {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(nrows: usize, ncols: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::dims(
                "DenseMatrix::from_row_major",
                format!("{} values", nrows * ncols),
                format!("{}", values.len()),
            ));
        }
        Ok(DenseMatrix { nrows, ncols, values })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::dims(
                "DenseMatrix::from_rows",
                format!("rows of length {ncols}"),
                "ragged rows".to_string(),
            ));
        }
        Ok(DenseMatrix {
            nrows,
            ncols,
            values: rows.concat(),
        })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                values.push(f(i, j));
            }
        }
        DenseMatrix { nrows, ncols, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col_to_vec(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.ncols != rhs.nrows {
            return Err(Error::dims(
                "DenseMatrix::mul",
                format!("lhs ncols == rhs nrows ({})", self.ncols),
                format!("{}x{} * {}x{}", self.nrows, self.ncols, rhs.nrows, rhs.ncols),
            ));
        }
        let mut out = DenseMatrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            let lhs_row = self.row(i);
            let out_row = out.row_mut(i);
            for (k, &lik) in lhs_row.iter().enumerate() {
                let rhs_row = rhs.row(k);
                for (o, &rkj) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + lik * rkj;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * rhs` without materializing the transpose.
    pub fn t_mul(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.nrows != rhs.nrows {
            return Err(Error::dims(
                "DenseMatrix::t_mul",
                format!("lhs nrows == rhs nrows ({})", self.nrows),
                format!("{}x{} vs {}x{}", self.nrows, self.ncols, rhs.nrows, rhs.ncols),
            ));
        }
        let mut out = DenseMatrix::zeros(self.ncols, rhs.ncols);
        for k in 0..self.nrows {
            let lhs_row = self.row(k);
            let rhs_row = rhs.row(k);
            for (i, &lki) in lhs_row.iter().enumerate() {
                let out_row = out.row_mut(i);
                for (o, &rkj) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + lki * rkj;
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᵀ * self`.
    pub fn gram(&self) -> DenseMatrix<T> {
        self.t_mul(self).expect("gram dimensions always agree")
    }

    /// Scales column `j` by `factors[j]`, i.e. right-multiplication by a
    /// diagonal matrix.
    pub fn scale_cols(&mut self, factors: &[T]) -> Result<()> {
        if factors.len() != self.ncols {
            return Err(Error::dims(
                "DenseMatrix::scale_cols",
                format!("{} factors", self.ncols),
                format!("{}", factors.len()),
            ));
        }
        for i in 0..self.nrows {
            for (v, &f) in self.row_mut(i).iter_mut().zip(factors) {
                *v = *v * f;
            }
        }
        Ok(())
    }

    pub fn scaled_cols(&self, factors: &[T]) -> Result<DenseMatrix<T>> {
        let mut out = self.clone();
        out.scale_cols(factors)?;
        Ok(out)
    }

    pub fn sub(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.nrows != rhs.nrows || self.ncols != rhs.ncols {
            return Err(Error::dims(
                "DenseMatrix::sub",
                format!("{}x{}", self.nrows, self.ncols),
                format!("{}x{}", rhs.nrows, rhs.ncols),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(DenseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            values,
        })
    }

    /// Entrywise max-norm; zero for empty matrices.
    pub fn max_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// `max_norm(self - rhs)` without allocating the difference.
    pub fn max_abs_diff(&self, rhs: &DenseMatrix<T>) -> Result<T> {
        if self.nrows != rhs.nrows || self.ncols != rhs.ncols {
            return Err(Error::dims(
                "DenseMatrix::max_abs_diff",
                format!("{}x{}", self.nrows, self.ncols),
                format!("{}x{}", rhs.nrows, rhs.ncols),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&rhs.values)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
    }

    pub fn frob_norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn frob_norm(&self) -> T {
        self.frob_norm_sq().sqrt()
    }

    /// Position of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.ncols, p % self.ncols))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.values[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.values[i * self.ncols + j]
    }
}
