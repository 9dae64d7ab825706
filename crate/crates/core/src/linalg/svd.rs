use crate::{Error, Real, Result};

use super::{householder_qr, DenseMatrix};

/// Thin singular value decomposition `M = U S Vᵀ` of a tall matrix.
#[derive(Debug, Clone)]
pub struct ThinSvd<T> {
    /// n×r, orthonormal columns.
    pub u: DenseMatrix<T>,
    /// Singular values, descending, nonnegative.
    pub s: Vec<T>,
    /// r×r, orthogonal.
    pub v: DenseMatrix<T>,
}

impl<T: Real> ThinSvd<T> {
    /// `U S Vᵀ`, for verification.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let us = self.u.scaled_cols(&self.s).expect("s has ncols entries");
        us.mul(&self.v.transpose()).expect("inner dims agree")
    }
}

const MAX_SWEEPS: usize = 60;

/// Thin SVD of an n×r matrix with n >= r.
///
/// Implemented as Householder QR followed by one-sided Jacobi on the r×r
/// triangular factor. Fully deterministic: cyclic pivot order, stable
/// descending sort of the singular values, and a fixed completion rule for
/// zero singular values (a zero matrix yields the first r canonical basis
/// columns for `U` and `V = I`). Column norms within `r·ε` of rounding level
/// relative to the largest are reported as exactly zero, so rank-deficient
/// inputs still yield orthonormal factors. The sign of each singular vector
/// pair is whatever the rotation sequence produces; callers that care apply
/// their own sign convention on top.
pub fn thin_svd<T: Real>(m: &DenseMatrix<T>) -> Result<ThinSvd<T>> {
    let n = m.nrows();
    let r = m.ncols();
    if n < r {
        return Err(Error::dims(
            "thin_svd",
            "nrows >= ncols".to_string(),
            format!("{n}x{r}"),
        ));
    }
    if let Some((row, col)) = m.first_non_finite() {
        return Err(Error::NonFinite {
            op: "thin_svd",
            row,
            col,
        });
    }
    if r == 0 {
        return Ok(ThinSvd {
            u: DenseMatrix::zeros(n, 0),
            s: Vec::new(),
            v: DenseMatrix::zeros(0, 0),
        });
    }

    // Exact power-of-two prescaling so extreme inputs cannot underflow the
    // column norms (or overflow their reciprocals) inside QR and Jacobi. The
    // factor is split in two because 2^±e itself may not be representable.
    let max_abs = m.max_norm();
    let two = T::from(2.0).unwrap();
    let (e1, e2) = if max_abs > T::zero() {
        let e = max_abs.log2().floor().to_i32().expect("f32/f64 exponent range");
        (e / 2, e - e / 2)
    } else {
        (0, 0)
    };
    let (f1, f2) = (two.powi(-e1), two.powi(-e2));
    let scaled = DenseMatrix::from_fn(n, r, |i, j| m[(i, j)] * f1 * f2);

    let (q, r_mat) = householder_qr(&scaled)?;
    let (small_u, mut s, v) = jacobi_svd_square(&r_mat)?;
    let u = q.mul(&small_u)?;
    let (g1, g2) = (two.powi(e1), two.powi(e2));
    for sv in &mut s {
        *sv = *sv * g1 * g2;
    }
    Ok(ThinSvd { u, s, v })
}

/// One-sided Jacobi SVD of a square matrix, in column-major scratch space.
fn jacobi_svd_square<T: Real>(a: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<T>, DenseMatrix<T>)> {
    let r = a.nrows();
    let mut g: Vec<Vec<T>> = (0..r).map(|j| a.col_to_vec(j)).collect();
    let mut v: Vec<Vec<T>> = (0..r)
        .map(|j| {
            let mut e = vec![T::zero(); r];
            e[j] = T::one();
            e
        })
        .collect();

    // The computed column dot product carries rounding noise of order
    // r·ε·‖c_p‖·‖c_q‖, so the stopping threshold must sit above that floor
    // or heavily graded columns dither forever. Square roots are taken
    // before multiplying to keep the threshold from underflowing.
    let tol = T::from(2 * r.max(2)).unwrap() * T::epsilon();
    let one = T::one();
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut sq: Vec<T> = g.iter().map(|c| c.iter().map(|&x| x * x).sum()).collect();
        let mut rotated = false;
        for p in 0..r {
            for q in p + 1..r {
                let apq: T = g[p].iter().zip(&g[q]).map(|(&x, &y)| x * y).sum();
                let app = sq[p];
                let aqq = sq[q];
                if app == T::zero() || aqq == T::zero() {
                    continue;
                }
                if apq.abs() <= tol * app.sqrt() * aqq.sqrt() {
                    continue;
                }
                // Rotation angle zeroing the (p,q) Gram entry.
                let zeta = (aqq - app) / (T::from(2.0).unwrap() * apq);
                let t = zeta.signum() / (zeta.abs() + (one + zeta * zeta).sqrt());
                if t == T::zero() {
                    // ζ overflowed: the rotation would be an exact identity,
                    // so the pair is orthogonal to working precision.
                    continue;
                }
                rotated = true;
                let c = one / (one + t * t).sqrt();
                let s = t * c;

                let (gp, gq) = pair_mut(&mut g, p, q);
                rotate(gp, gq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate(vp, vq, c, s);
                sq[p] = app - t * apq;
                sq[q] = aqq + t * apq;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Breakdown {
            step: MAX_SWEEPS,
            reason: "one-sided Jacobi SVD did not converge".to_string(),
        });
    }

    let norms: Vec<T> = g
        .iter()
        .map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..r).collect();
    // Stable: ties keep the pre-sort (rotation output) order.
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    // A column whose norm collapsed to rounding level carries no usable
    // direction; normalizing it would inject a non-orthogonal garbage
    // vector. Round such singular values to zero and complete the basis.
    let zero_tol =
        norms.iter().cloned().fold(T::zero(), T::max) * T::epsilon() * T::from(r).unwrap();

    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(r);
    let mut s_sorted = Vec::with_capacity(r);
    let mut zero_slots = Vec::new();
    for (slot, &idx) in order.iter().enumerate() {
        if norms[idx] > zero_tol {
            s_sorted.push(norms[idx]);
            let inv = norms[idx].recip();
            u_cols.push(g[idx].iter().map(|&x| x * inv).collect());
        } else {
            s_sorted.push(T::zero());
            u_cols.push(vec![T::zero(); r]);
            zero_slots.push(slot);
        }
    }
    complete_zero_columns(&mut u_cols, &zero_slots);

    let u = DenseMatrix::from_fn(r, r, |i, j| u_cols[j][i]);
    let v_sorted = DenseMatrix::from_fn(r, r, |i, j| v[order[j]][i]);
    Ok((u, s_sorted, v_sorted))
}

fn pair_mut<T>(cols: &mut [Vec<T>], p: usize, q: usize) -> (&mut Vec<T>, &mut Vec<T>) {
    debug_assert!(p < q);
    let (head, tail) = cols.split_at_mut(q);
    (&mut head[p], &mut tail[0])
}

fn rotate<T: Real>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fills columns for exactly-zero singular values with canonical basis
/// vectors orthogonalized against the rest; picks the candidate with the
/// largest residual (lowest index on ties) so the choice is deterministic.
fn complete_zero_columns<T: Real>(u_cols: &mut [Vec<T>], zero_slots: &[usize]) {
    let r = u_cols.len();
    for &slot in zero_slots {
        let mut best: Option<(T, usize, Vec<T>)> = None;
        for cand in 0..r {
            let mut v = vec![T::zero(); r];
            v[cand] = T::one();
            for (j, col) in u_cols.iter().enumerate() {
                if j == slot {
                    continue;
                }
                let proj: T = col.iter().zip(&v).map(|(&a, &b)| a * b).sum();
                for (vi, &ci) in v.iter_mut().zip(col) {
                    *vi = *vi - proj * ci;
                }
            }
            let nsq: T = v.iter().map(|&x| x * x).sum();
            if best.as_ref().map_or(true, |(b, _, _)| nsq > *b) {
                best = Some((nsq, cand, v));
            }
        }
        let (nsq, _, v) = best.expect("r > 0");
        let inv = nsq.sqrt().recip();
        u_cols[slot] = v.into_iter().map(|x| x * inv).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_valid_svd(m: &DenseMatrix<f64>, svd: &ThinSvd<f64>) {
        let scale = 1.0_f64.max(m.frob_norm());
        assert!(
            svd.reconstruct().max_abs_diff(m).unwrap() <= 1e-12 * scale,
            "U S Vᵀ must reconstruct the input"
        );
        let utu = svd.u.gram();
        let vtv = svd.v.gram();
        let r = svd.s.len();
        for i in 0..r {
            for j in 0..r {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((utu[(i, j)] - want).abs() <= 1e-12, "UᵀU != I");
                assert!((vtv[(i, j)] - want).abs() <= 1e-12, "VᵀV != I");
            }
        }
        for w in svd.s.windows(2) {
            assert!(w[0] >= w[1], "singular values must be nonincreasing");
        }
        assert!(svd.s.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn diagonal_matrix_recovers_its_diagonal() {
        let m =
            DenseMatrix::from_rows(&[vec![3.0f64, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert!((svd.s[0] - 3.0).abs() < 1e-14);
        assert!((svd.s[1] - 1.0).abs() < 1e-14);
        assert_valid_svd(&m, &svd);
    }

    #[test]
    fn zero_matrix_yields_canonical_basis() {
        let m = DenseMatrix::<f64>::zeros(5, 3);
        let svd = thin_svd(&m).unwrap();
        assert_eq!(svd.s, vec![0.0, 0.0, 0.0]);
        assert_eq!(svd.u, DenseMatrix::eye(5, 3));
        assert_eq!(svd.v, DenseMatrix::eye(3, 3));
    }

    #[test]
    fn rank_deficient_matrix_is_handled() {
        // Second column is a multiple of the first.
        let m = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![1.0, 2.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![1.0, 2.0, 0.0],
        ])
        .unwrap();
        let svd = thin_svd(&m).unwrap();
        assert_valid_svd(&m, &svd);
        assert!(svd.s[2] < 1e-13);
    }

    #[test]
    fn repeated_column_in_wide_panel_stays_orthonormal() {
        // With many columns the rotations leave the collapsed direction at
        // rounding level instead of exactly zero; normalizing that residual
        // used to inject a garbage vector into `U`.
        let mut m: DenseMatrix<f64> = crate::linalg::random_gaussian(23, 12, 4242);
        for i in 0..m.nrows() {
            m[(i, 11)] = m[(i, 0)];
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                m[(i, j)] *= 3.21e-4;
            }
        }
        let svd = thin_svd(&m).unwrap();
        assert_valid_svd(&m, &svd);
        assert_eq!(svd.s[11], 0.0);
    }

    #[test]
    fn repeated_calls_are_bitwise_identical() {
        let m = DenseMatrix::from_fn(7, 4, |i, j| ((i * 31 + j * 17) % 13) as f64 - 6.0);
        let a = thin_svd(&m).unwrap();
        let b = thin_svd(&m).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.s, b.s);
        assert_eq!(a.v, b.v);
    }

    #[test]
    fn wide_and_non_finite_inputs_are_rejected() {
        assert!(thin_svd(&DenseMatrix::<f64>::zeros(2, 4)).is_err());
        let mut m = DenseMatrix::<f64>::zeros(3, 2);
        m[(1, 1)] = f64::NAN;
        assert!(matches!(thin_svd(&m), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn known_two_by_two_singular_values() {
        // M = [[3, 0], [4, 5]] has singular values sqrt(45) and sqrt(5).
        let m = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![4.0, 5.0]]).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert!((svd.s[0] - 45.0_f64.sqrt()).abs() < 1e-13);
        assert!((svd.s[1] - 5.0_f64.sqrt()).abs() < 1e-13);
        assert_valid_svd(&m, &svd);
    }
}
