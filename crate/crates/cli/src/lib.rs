//! File formats, generators and experiment orchestration behind the
//! `softsvd` binary.

pub mod experiment;
pub mod gen;
pub mod mm;
pub mod svg;

use softsvd::linalg::SparseMatrix;

/// Fill fraction above which sparse storage stops paying off.
pub const DENSITY_WARNING_THRESHOLD: f64 = 0.25;

/// Warning for inputs dense enough that the sparse container is just
/// overhead, or `None` below the threshold.
pub fn density_warning(m: &SparseMatrix<f64>) -> Option<String> {
    let density = m.density();
    if density > DENSITY_WARNING_THRESHOLD {
        Some(format!(
            "matrix is {:.1}% filled ({} of {} entries); sparse storage gives no benefit",
            density * 100.0,
            m.nnz(),
            m.nrows() * m.ncols(),
        ))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_warning_thresholds() {
        let dense = SparseMatrix::from_dense(
            &softsvd::linalg::random_gaussian::<f64>(4, 4, 1),
        );
        assert!(density_warning(&dense).unwrap().contains("100.0%"));

        let sparse = SparseMatrix::<f64>::from_triplets(10, 10, [(0, 0, 1.0)]).unwrap();
        assert!(density_warning(&sparse).is_none());
    }
}
