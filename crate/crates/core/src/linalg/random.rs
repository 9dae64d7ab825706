use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Real, Result};

use super::{householder_qr, DenseMatrix};

/// Seeded standard-normal matrix, filled row by row.
///
/// All randomness in this crate flows through ChaCha8 so that a seed pins the
/// exact entry stream across platforms. Samples are drawn as `f64` and
/// converted, which keeps the stream independent of the scalar type.
pub fn random_gaussian<T: Real>(nrows: usize, ncols: usize, seed: u64) -> DenseMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_with(&mut rng, nrows, ncols)
}

/// Like [`random_gaussian`] but drawing from an existing stream.
pub fn gaussian_with<T: Real>(rng: &mut ChaCha8Rng, nrows: usize, ncols: usize) -> DenseMatrix<T> {
    DenseMatrix::from_fn(nrows, ncols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        T::from(x).expect("f64 converts into Real")
    })
}

/// Seeded random matrix with orthonormal columns (n×r, r <= n).
///
/// QR of a Gaussian draw, with the sign of each column fixed so the
/// triangular factor has nonnegative diagonal; the result is a deterministic
/// function of `(nrows, ncols, seed)`.
pub fn random_orthonormal<T: Real>(nrows: usize, ncols: usize, seed: u64) -> Result<DenseMatrix<T>> {
    if ncols > nrows {
        return Err(Error::dims(
            "random_orthonormal",
            "ncols <= nrows".to_string(),
            format!("{nrows}x{ncols}"),
        ));
    }
    let g = random_gaussian::<T>(nrows, ncols, seed);
    let (mut q, r) = householder_qr(&g)?;
    let flips: Vec<T> = (0..ncols)
        .map(|j| {
            if r[(j, j)] < T::zero() {
                -T::one()
            } else {
                T::one()
            }
        })
        .collect();
    q.scale_cols(&flips)?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_are_orthonormal() {
        let q = random_orthonormal::<f64>(20, 5, 42).unwrap();
        let g = q.gram();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = random_orthonormal::<f64>(10, 3, 7).unwrap();
        let b = random_orthonormal::<f64>(10, 3, 7).unwrap();
        assert_eq!(a, b);
        let c = random_orthonormal::<f64>(10, 3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn one_by_one_is_a_unit() {
        let q = random_orthonormal::<f64>(1, 1, 0).unwrap();
        assert!((q[(0, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn too_many_columns_is_an_error() {
        assert!(random_orthonormal::<f64>(3, 4, 0).is_err());
    }

    #[test]
    fn f32_stream_mirrors_f64_stream() {
        let a = random_gaussian::<f64>(4, 4, 11);
        let b = random_gaussian::<f32>(4, 4, 11);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((*x as f32 - *y).abs() < 1e-6);
        }
    }
}
