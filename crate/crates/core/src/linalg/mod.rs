//! Matrix types and the deterministic kernels built on them.
//!
//! Everything here is written against [`crate::Real`], so the same code runs
//! in `f32` and `f64`. Determinism is part of the contract: no kernel
//! consults global RNG state, traversal orders are fixed, and repeated calls
//! with equal inputs produce bitwise-equal outputs.

mod dense;
mod diag;
mod qr;
mod random;
mod ridge;
mod sparse;
mod svd;

pub use dense::DenseMatrix;
pub use diag::{soft_threshold, DiagonalMatrix, SignMatrix};
pub use qr::householder_qr;
pub use random::{gaussian_with, random_gaussian, random_orthonormal};
pub use ridge::ridge_solve;
pub(crate) use ridge::spd_ridge_solve;
pub use sparse::SparseMatrix;
pub use svd::{thin_svd, ThinSvd};
