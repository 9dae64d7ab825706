use crate::{Error, Real, Result};

use super::DenseMatrix;

/// Thin Householder QR of a tall matrix (`nrows >= ncols`).
///
/// Returns `(Q, R)` with `Q` of shape n×r having orthonormal columns and `R`
/// upper triangular r×r. No pivoting, so the factorization is deterministic.
/// Columns that are exactly zero below the current diagonal produce a zero
/// row in `R` and leave `Q` on the corresponding canonical direction.
pub fn householder_qr<T: Real>(m: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let n = m.nrows();
    let r = m.ncols();
    if n < r {
        return Err(Error::dims(
            "householder_qr",
            "nrows >= ncols".to_string(),
            format!("{n}x{r}"),
        ));
    }

    // Column-major working copy; reflector application is column-local.
    let mut cols: Vec<Vec<T>> = (0..r).map(|j| m.col_to_vec(j)).collect();
    // Reflector k lives in rows k.., normalized so H = I - beta v vᵀ.
    let mut reflectors: Vec<(Vec<T>, T)> = Vec::with_capacity(r);

    let two = T::from(2.0).unwrap();
    for k in 0..r {
        // The reflector is scale invariant, so the pivot column is rescaled
        // by an exact power of two before squaring; otherwise columns far
        // below the matrix scale underflow the norm and overflow beta.
        let cmax = cols[k][k..]
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()));
        if cmax == T::zero() {
            reflectors.push((Vec::new(), T::zero()));
            continue;
        }
        let e = cmax.log2().floor().to_i32().expect("f32/f64 exponent range");
        let scale = two.powi(-e);
        let mut v: Vec<T> = cols[k][k..].iter().map(|&x| x * scale).collect();
        let norm_s = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        let alpha_s = if v[0] > T::zero() { -norm_s } else { norm_s };
        let alpha = alpha_s * two.powi(e);
        v[0] = v[0] - alpha_s;
        let vsq: T = v.iter().map(|&x| x * x).sum();
        let beta = two / vsq;

        cols[k][k] = alpha;
        for x in cols[k][k + 1..].iter_mut() {
            *x = T::zero();
        }
        for col in cols.iter_mut().skip(k + 1) {
            let w: T = v.iter().zip(&col[k..]).map(|(&a, &b)| a * b).sum::<T>() * beta;
            for (c, &vi) in col[k..].iter_mut().zip(&v) {
                *c = *c - w * vi;
            }
        }
        reflectors.push((v, beta));
    }

    let mut r_mat = DenseMatrix::zeros(r, r);
    for j in 0..r {
        for i in 0..=j {
            r_mat[(i, j)] = cols[j][i];
        }
    }

    // Q = H_0 · H_1 · ... · H_{r-1} · I_{n×r}, built by applying reflectors
    // in reverse to the rectangular identity.
    let mut q_cols: Vec<Vec<T>> = (0..r)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            e
        })
        .collect();
    for k in (0..r).rev() {
        let (v, beta) = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for col in q_cols.iter_mut() {
            let w: T = v.iter().zip(&col[k..]).map(|(&a, &b)| a * b).sum::<T>() * *beta;
            for (c, &vi) in col[k..].iter_mut().zip(v) {
                *c = *c - w * vi;
            }
        }
    }
    let q = DenseMatrix::from_fn(n, r, |i, j| q_cols[j][i]);
    Ok((q, r_mat))
}
