use crate::{Error, Real, Result};

use super::{DenseMatrix, DiagonalMatrix};

/// `M (G + λI)⁻¹` for diagonal `G`: the ridge-regularized rescaling used by
/// the orthogonalized solver, where the Gram matrix is diagonal by
/// construction.
pub fn ridge_solve<T: Real>(
    m: &DenseMatrix<T>,
    g: &DiagonalMatrix<T>,
    lambda: T,
) -> Result<DenseMatrix<T>> {
    if lambda <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "ridge_solve: lambda must be positive, got {lambda}"
        )));
    }
    if g.dim() != m.ncols() {
        return Err(Error::dims(
            "ridge_solve",
            format!("diagonal of dim {}", m.ncols()),
            format!("dim {}", g.dim()),
        ));
    }
    m.scaled_cols(&g.ridge_inverse_diag(lambda))
}

/// `M (G + λI)⁻¹` for a full symmetric positive semidefinite `G` (an r×r
/// Gram matrix), via Cholesky. Used by the alternating ridge solver whose
/// Gram matrices are not diagonal.
pub(crate) fn spd_ridge_solve<T: Real>(
    m: &DenseMatrix<T>,
    gram: &DenseMatrix<T>,
    lambda: T,
) -> Result<DenseMatrix<T>> {
    let r = gram.nrows();
    if gram.ncols() != r || m.ncols() != r {
        return Err(Error::dims(
            "spd_ridge_solve",
            format!("square Gram matching {} columns", m.ncols()),
            format!("{}x{}", gram.nrows(), gram.ncols()),
        ));
    }
    let mut l = DenseMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..=i {
            let mut sum = gram[(i, j)];
            if i == j {
                sum = sum + lambda;
            }
            for k in 0..j {
                sum = sum - l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= T::zero() {
                    return Err(Error::Breakdown {
                        step: i,
                        reason: "Cholesky pivot not positive; Gram + λI must be SPD".to_string(),
                    });
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }

    let mut out = m.clone();
    for row_i in 0..out.nrows() {
        let row = out.row_mut(row_i);
        // Forward substitution L y = row.
        for i in 0..r {
            let mut v = row[i];
            for k in 0..i {
                v = v - l[(i, k)] * row[k];
            }
            row[i] = v / l[(i, i)];
        }
        // Back substitution Lᵀ z = y.
        for i in (0..r).rev() {
            let mut v = row[i];
            for k in i + 1..r {
                v = v - l[(k, i)] * row[k];
            }
            row[i] = v / l[(i, i)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_ridge_rescales_columns() {
        let m = DenseMatrix::from_rows(&[vec![4.0, 2.0]]).unwrap();
        let g = DiagonalMatrix::new(vec![3.0, 0.0]);
        let got = ridge_solve(&m, &g, 1.0).unwrap();
        assert_eq!(got.values(), &[1.0, 2.0]);
    }

    #[test]
    fn lambda_must_be_positive() {
        let m = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let g = DiagonalMatrix::identity(1);
        assert!(ridge_solve(&m, &g, 0.0).is_err());
        assert!(ridge_solve(&m, &g, -1.0).is_err());
    }

    #[test]
    fn spd_solve_matches_diagonal_solve_on_diagonal_gram() {
        let m = DenseMatrix::from_rows(&[vec![4.0, 2.0], vec![-1.0, 3.0]]).unwrap();
        let g_diag = DiagonalMatrix::new(vec![3.0, 1.0]);
        let g_full =
            DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let a = ridge_solve(&m, &g_diag, 0.5).unwrap();
        let b = spd_ridge_solve(&m, &g_full, 0.5).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
    }

    #[test]
    fn spd_solve_inverts_known_system() {
        // G + λI = [[2, 1], [1, 3]] for G = [[1, 1], [1, 2]], λ = 1.
        let g = DenseMatrix::from_rows(&[vec![1.0f64, 1.0], vec![1.0, 2.0]]).unwrap();
        let m = DenseMatrix::from_rows(&[vec![1.0f64, 0.0], vec![0.0, 1.0]]).unwrap();
        let inv = spd_ridge_solve(&m, &g, 1.0).unwrap();
        // Inverse of [[2, 1], [1, 3]] is [[3, -1], [-1, 2]] / 5.
        assert!((inv[(0, 0)] - 0.6).abs() < 1e-14);
        assert!((inv[(0, 1)] + 0.2).abs() < 1e-14);
        assert!((inv[(1, 0)] + 0.2).abs() < 1e-14);
        assert!((inv[(1, 1)] - 0.4).abs() < 1e-14);
    }
}
