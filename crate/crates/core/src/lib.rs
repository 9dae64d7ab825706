//! Rank-restricted soft SVD.
//!
//! Finds rank-`r` factors `A` (n×r) and `B` (m×r) minimizing
//!
//! ```text
//! (1/2)·||X - A·Bᵀ||²_F + (λ/2)·(||A||²_F + ||B||²_F)
//! ```
//!
//! which is the factored form of nuclear-norm regularized matrix
//! approximation. Three solvers are provided: classic alternating ridge
//! regression ([`solver::als_run`]), an orthogonalized iteration that tracks
//! singular values directly ([`solver::rrss_run`]), and the closed-form
//! soft-thresholded SVD used as a reference ([`solver::oracle_soft_svd`]).
//!
//! The orthogonalized iteration re-factors a small matrix every step, and the
//! signs of those singular vectors are a genuine degree of freedom: left
//! uncontrolled they can flip forever and stall the stopping rule. Sign
//! handling is therefore explicit and pluggable ([`solver::SignPolicy`]).
//! [`fixedpoint`] contains the scalar recurrence governing how each singular
//! value converges, and [`diagnostics`] computes the costs, subspace errors
//! and theoretical rates used to verify runs against that theory.
//!
//! All numeric kernels are deterministic: sparse products traverse storage
//! order, the SVD kernel is deterministic one-sided Jacobi, and every random
//! draw comes from a seeded ChaCha8 stream. Two runs with the same inputs and
//! seeds produce bitwise-identical results.

pub mod diagnostics;
mod error;
pub mod fixedpoint;
pub mod linalg;
pub mod solver;

pub use error::{Error, Result};

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the kernels are generic over.
///
/// Blanket-implemented for anything satisfying the bounds, in practice `f32`
/// and `f64`. Random sampling always draws `f64` and converts, so the sample
/// stream for a given seed does not depend on the scalar type.
pub trait Real:
    Float + FromPrimitive + Sum<Self> + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + Sum<Self> + Debug + Display + LowerExp + Send + Sync + 'static
{
}

/// Default-precision aliases. Solver-quality tolerances assume `f64`.
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type SparseMatrix64 = linalg::SparseMatrix<f64>;
pub type DiagonalMatrix64 = linalg::DiagonalMatrix<f64>;
pub type ThinSvd64 = linalg::ThinSvd<f64>;
pub type SoftSvdSolution64 = solver::SoftSvdSolution<f64>;

/// Single-precision aliases.
pub type DenseMatrix32 = linalg::DenseMatrix<f32>;
pub type SparseMatrix32 = linalg::SparseMatrix<f32>;
pub type DiagonalMatrix32 = linalg::DiagonalMatrix<f32>;
