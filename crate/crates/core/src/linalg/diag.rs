use std::fmt;
use std::str::FromStr;

use crate::{Error, Real, Result};

/// Diagonal matrix stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix<T> {
    diag: Vec<T>,
}

impl<T: Real> DiagonalMatrix<T> {
    pub fn new(diag: Vec<T>) -> Self {
        DiagonalMatrix { diag }
    }

    pub fn identity(dim: usize) -> Self {
        DiagonalMatrix {
            diag: vec![T::one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> DiagonalMatrix<T> {
        DiagonalMatrix {
            diag: self.diag.iter().map(|&d| f(d)).collect(),
        }
    }

    pub fn sqrt(&self) -> DiagonalMatrix<T> {
        self.map(|d| d.sqrt())
    }

    pub fn squared(&self) -> DiagonalMatrix<T> {
        self.map(|d| d * d)
    }

    /// Entries of `(self + λI)⁻¹`.
    pub fn ridge_inverse_diag(&self, lambda: T) -> Vec<T> {
        self.diag.iter().map(|&d| (d + lambda).recip()).collect()
    }
}

/// Soft-thresholds a diagonal of singular values: `D_ii = sqrt((S_ii - λ)₊)`.
///
/// This is the diagonal of the optimal factor scaling for regularization
/// strength `λ`: directions with singular value below `λ` are cut to zero.
pub fn soft_threshold<T: Real>(s: &DiagonalMatrix<T>, lambda: T) -> Result<DiagonalMatrix<T>> {
    if lambda < T::zero() {
        return Err(Error::InvalidParam(format!(
            "soft_threshold: lambda must be nonnegative, got {lambda}"
        )));
    }
    Ok(s.map(|v| (v - lambda).max(T::zero()).sqrt()))
}

/// Diagonal matrix of ±1 entries.
///
/// Singular vectors are only determined up to a per-column sign; the solvers
/// track and apply those signs through this type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    signs: Vec<i8>,
}

impl SignMatrix {
    pub fn identity(dim: usize) -> Self {
        SignMatrix { signs: vec![1; dim] }
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParam(format!(
                "SignMatrix entries must be +1 or -1, got {bad}"
            )));
        }
        Ok(SignMatrix { signs })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// Diagonal as scalars, for column scaling.
    pub fn factors<T: Real>(&self) -> Vec<T> {
        self.signs
            .iter()
            .map(|&s| if s == 1 { T::one() } else { -T::one() })
            .collect()
    }

    /// Composition `self * rhs` (entrywise product of the diagonals).
    pub fn compose(&self, rhs: &SignMatrix) -> Result<SignMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::dims(
                "SignMatrix::compose",
                format!("dim {}", self.dim()),
                format!("dim {}", rhs.dim()),
            ));
        }
        Ok(SignMatrix {
            signs: self
                .signs
                .iter()
                .zip(&rhs.signs)
                .map(|(&a, &b)| a * b)
                .collect(),
        })
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            write!(f, "{}", if s == 1 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// Parses patterns like `+-+`.
impl FromStr for SignMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidParam(format!(
                    "sign pattern may only contain '+' and '-', got {other:?}"
                ))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(|signs| SignMatrix { signs })
    }
}
