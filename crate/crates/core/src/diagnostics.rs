//! Cost functionals, subspace-alignment errors, theoretical rates, and the
//! limit-cost formulas, plus the per-iteration trace records built from them.
//!
//! Everything here is a pure function of solver snapshots. The two cost
//! functionals never materialize `A·Bᵀ` at full density: the residual is
//! expanded through `r×r` Gram products so sparse inputs stay sparse. The
//! subspace metrics need the dense reference SVD ([`SpectralReference`]) and
//! are therefore only evaluated at test scale; production traces carry "NA"
//! in those columns.

use crate::linalg::{householder_qr, thin_svd, DenseMatrix, SignMatrix, SparseMatrix};
use crate::solver::{IterationSnapshot, SolverObserver};
use crate::{Error, Real, Result};

/// Dense reference SVD of the input: the oracle every convergence metric is
/// measured against.
///
/// Holds the full thin factors `U` (n×p), `V` (m×p) and the descending
/// singular values, p = min(n, m).
#[derive(Debug, Clone)]
pub struct SpectralReference<T> {
    u_full: DenseMatrix<T>,
    v_full: DenseMatrix<T>,
    s: Vec<T>,
}

impl<T: Real> SpectralReference<T> {
    pub fn from_dense(x: &DenseMatrix<T>) -> Result<Self> {
        let (u_full, s, v_full) = if x.nrows() >= x.ncols() {
            let svd = thin_svd(x)?;
            (svd.u, svd.s, svd.v)
        } else {
            let svd = thin_svd(&x.transpose())?;
            (svd.v, svd.s, svd.u)
        };
        Ok(SpectralReference { u_full, v_full, s })
    }

    pub fn singular_values(&self) -> &[T] {
        &self.s
    }

    pub fn u(&self) -> &DenseMatrix<T> {
        &self.u_full
    }

    pub fn v(&self) -> &DenseMatrix<T> {
        &self.v_full
    }

    /// Alignment error of a left-basis iterate against the trailing left
    /// singular vectors.
    pub fn subspace_error_left(&self, u_k: &DenseMatrix<T>, r: usize) -> Result<T> {
        trailing_alignment(u_k, &self.u_full, r)
    }

    /// Alignment error of a right-basis iterate against the trailing right
    /// singular vectors.
    pub fn subspace_error_right(&self, v_k: &DenseMatrix<T>, r: usize) -> Result<T> {
        trailing_alignment(v_k, &self.v_full, r)
    }
}

/// `‖U_kᵀ U_{(r+1:p)}‖_max`: how much of the iterate still points along the
/// trailing reference singular vectors. Zero iff the iterate's column space
/// lies inside the leading-r reference subspace.
pub fn subspace_error<T: Real>(
    u_k: &DenseMatrix<T>,
    reference: &SpectralReference<T>,
    r: usize,
) -> Result<T> {
    reference.subspace_error_left(u_k, r)
}

fn trailing_alignment<T: Real>(
    u_k: &DenseMatrix<T>,
    basis: &DenseMatrix<T>,
    r: usize,
) -> Result<T> {
    let (n, p) = (basis.nrows(), basis.ncols());
    if r == 0 || r > p {
        return Err(Error::InvalidParam(format!(
            "subspace_error: r must satisfy 1 <= r <= {p}, got {r}"
        )));
    }
    if u_k.nrows() != n || u_k.ncols() != r {
        return Err(Error::dims(
            "subspace_error",
            format!("{n}x{r} iterate"),
            format!("{}x{}", u_k.nrows(), u_k.ncols()),
        ));
    }
    let mut max = T::zero();
    for i in 0..r {
        for j in r..p {
            let mut dot = T::zero();
            for l in 0..n {
                dot = dot + u_k[(l, i)] * basis[(l, j)];
            }
            max = max.max(dot.abs());
        }
    }
    Ok(max)
}

/// The asymptotic per-iteration contraction `(s_{l+1}/s_l)²` of the subspace
/// error for the splitting after the `l`-th singular value (1-based).
pub fn theoretical_rate<T: Real>(reference: &SpectralReference<T>, l: usize) -> Result<T> {
    let p = reference.s.len();
    if l == 0 || l >= p {
        return Err(Error::InvalidParam(format!(
            "theoretical_rate: l must satisfy 1 <= l < {p}, got {l}"
        )));
    }
    let s_l = reference.s[l - 1];
    if s_l == T::zero() {
        return Err(Error::InvalidParam(
            "theoretical_rate: rate undefined when s_l = 0".into(),
        ));
    }
    let ratio = reference.s[l] / s_l;
    Ok(ratio * ratio)
}

/// Max-norm distance of a raw right-singular-vector iterate from its
/// predicted limit `diag(((s_i−λ)⁺+λ)/s_i)·W`. When λ < s_r the prediction
/// reduces to `W` itself, so the distance measures how far the raw vectors
/// are from settling into the applied signs.
pub fn v_diag_distance<T: Real>(
    v_k: &DenseMatrix<T>,
    w_k: &SignMatrix,
    reference: &SpectralReference<T>,
    lambda: T,
    r: usize,
) -> Result<T> {
    if r == 0 || r > reference.s.len() {
        return Err(Error::InvalidParam(format!(
            "v_diag_distance: r must satisfy 1 <= r <= {}, got {r}",
            reference.s.len()
        )));
    }
    if v_k.nrows() != r || v_k.ncols() != r || w_k.dim() != r {
        return Err(Error::dims(
            "v_diag_distance",
            format!("{r}x{r} V and length-{r} W"),
            format!("{}x{} V, length-{} W", v_k.nrows(), v_k.ncols(), w_k.dim()),
        ));
    }
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "v_diag_distance: lambda must be finite and positive, got {lambda}"
        )));
    }
    let signs = w_k.factors::<T>();
    let mut max = T::zero();
    for i in 0..r {
        let s_i = reference.s[i];
        let ratio = ((s_i - lambda).max(T::zero()) + lambda) / s_i;
        for j in 0..r {
            let predicted = if i == j { ratio * signs[i] } else { T::zero() };
            max = max.max((v_k[(i, j)] - predicted).abs());
        }
    }
    Ok(max)
}

/// Residual norm `‖X − A_*B_*ᵀ‖_F` of the limit factors under a given
/// product of the applied sign matrices, general form:
/// `‖S − (S−λI)⁺ S² ((S−λI)⁺+λI)⁻² I_{p×r} W̃W I_{r×p}‖_F`.
///
/// The all-positive product gives the minimum; any flipped coordinate with
/// `s_i > λ` strictly raises it.
pub fn limit_cost<T: Real>(
    reference: &SpectralReference<T>,
    lambda: T,
    r: usize,
    sign_product: &SignMatrix,
) -> Result<T> {
    limit_cost_with(reference, lambda, r, sign_product, |s_i, lambda, eps| {
        let soft = (s_i - lambda).max(T::zero());
        let scaled = soft + lambda;
        s_i - soft * s_i * s_i / (scaled * scaled) * eps
    })
}

/// The reduced limit-residual formula `‖S − (S−λI)⁺ I_{p×r} W̃W I_{r×p}‖_F`,
/// valid when λ < s_r; agrees with [`limit_cost`] there.
pub fn limit_cost_reduced<T: Real>(
    reference: &SpectralReference<T>,
    lambda: T,
    r: usize,
    sign_product: &SignMatrix,
) -> Result<T> {
    limit_cost_with(reference, lambda, r, sign_product, |s_i, lambda, eps| {
        s_i - (s_i - lambda).max(T::zero()) * eps
    })
}

fn limit_cost_with<T: Real>(
    reference: &SpectralReference<T>,
    lambda: T,
    r: usize,
    sign_product: &SignMatrix,
    leading_entry: impl Fn(T, T, T) -> T,
) -> Result<T> {
    let p = reference.s.len();
    if r == 0 || r > p {
        return Err(Error::InvalidParam(format!(
            "limit_cost: r must satisfy 1 <= r <= {p}, got {r}"
        )));
    }
    if sign_product.dim() != r {
        return Err(Error::dims(
            "limit_cost",
            format!("sign product of dimension {r}"),
            format!("dimension {}", sign_product.dim()),
        ));
    }
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "limit_cost: lambda must be finite and positive, got {lambda}"
        )));
    }
    let signs = sign_product.factors::<T>();
    let mut sum = T::zero();
    for (i, &s_i) in reference.s.iter().enumerate() {
        let entry = if i < r {
            leading_entry(s_i, lambda, signs[i])
        } else {
            s_i
        };
        sum = sum + entry * entry;
    }
    Ok(sum.sqrt())
}

/// `‖X − ABᵀ‖²_F` via the Gram expansion
/// `‖X‖² − 2⟨X, ABᵀ⟩ + tr(AᵀA · BᵀB)`; never materializes `ABᵀ`.
pub fn residual_frob_sq<T: Real>(
    x: &SparseMatrix<T>,
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<T> {
    if a.nrows() != x.nrows() || b.nrows() != x.ncols() || a.ncols() != b.ncols() {
        return Err(Error::dims(
            "residual_frob_sq",
            format!("A {}x r, B {}x r", x.nrows(), x.ncols()),
            format!(
                "A {}x{}, B {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            ),
        ));
    }
    let r = a.ncols();
    let mut cross = T::zero();
    for (i, j, v) in x.iter_entries() {
        let (ai, bj) = (a.row(i), b.row(j));
        let mut dot = T::zero();
        for l in 0..r {
            dot = dot + ai[l] * bj[l];
        }
        cross = cross + v * dot;
    }
    let ga = a.gram();
    let gb = b.gram();
    let mut prod_sq = T::zero();
    for i in 0..r {
        for j in 0..r {
            prod_sq = prod_sq + ga[(i, j)] * gb[(i, j)];
        }
    }
    let two = T::one() + T::one();
    Ok(x.frob_norm_sq() - two * cross + prod_sq)
}

/// The factored ridge functional
/// `½‖X − ABᵀ‖²_F + (λ/2)(‖A‖²_F + ‖B‖²_F)`.
pub fn cost_rrss<T: Real>(
    x: &SparseMatrix<T>,
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    lambda: T,
) -> Result<T> {
    let half = T::from(0.5).unwrap();
    let res = residual_frob_sq(x, a, b)?;
    Ok(half * res + half * lambda * (a.frob_norm_sq() + b.frob_norm_sq()))
}

/// The nuclear-norm functional `½‖X − Z‖²_F + λ‖Z‖_*` for `Z = ABᵀ`, with
/// the nuclear norm taken from the factored singular values.
pub fn cost_nuclear<T: Real>(
    x: &SparseMatrix<T>,
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    lambda: T,
) -> Result<T> {
    let half = T::from(0.5).unwrap();
    let res = residual_frob_sq(x, a, b)?;
    let nuclear: T = factored_singular_values(a, b)?.into_iter().sum();
    Ok(half * res + lambda * nuclear)
}

/// Cost of the exact rank-`rank` soft-thresholded solution, priced from the
/// reference singular values: `Σ_{i<r} [½(σᵢ − (σᵢ−λ)⁺)² + λ(σᵢ−λ)⁺]`
/// plus the truncation tail `Σ_{i≥r} ½σᵢ²`.
pub fn oracle_cost<T: Real>(
    reference: &SpectralReference<T>,
    rank: usize,
    lambda: T,
) -> Result<T> {
    let s = reference.singular_values();
    if rank == 0 || rank > s.len() {
        return Err(Error::InvalidParam(format!(
            "oracle_cost: rank must satisfy 1 <= rank <= {}, got {rank}",
            s.len()
        )));
    }
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "oracle_cost: lambda must be finite and positive, got {lambda}"
        )));
    }
    let half = T::from(0.5).unwrap();
    Ok(s.iter()
        .enumerate()
        .map(|(i, &si)| {
            if i < rank {
                let soft = (si - lambda).max(T::zero());
                half * (si - soft) * (si - soft) + lambda * soft
            } else {
                half * si * si
            }
        })
        .sum())
}

/// Singular values of `A·Bᵀ` without forming the product: QR both factors,
/// then a small `r×r` SVD of `R_A·R_Bᵀ`. Descending, length r.
pub fn factored_singular_values<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<Vec<T>> {
    if a.ncols() != b.ncols() {
        return Err(Error::dims(
            "factored_singular_values",
            format!("factors with equal column counts"),
            format!("{} vs {}", a.ncols(), b.ncols()),
        ));
    }
    let (_, ra) = householder_qr(a)?;
    let (_, rb) = householder_qr(b)?;
    let core = ra.mul(&rb.transpose())?;
    Ok(thin_svd(&core)?.s)
}

/// One trace row: the spec'd diagnostics for a single solver iteration.
/// Metrics that need the dense oracle (or a solver that tracks signs) are
/// optional and serialize as "NA".
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub iter: usize,
    pub cost_rrss: T,
    pub cost_nuclear: T,
    pub stop_value: T,
    pub subspace_err_u: Option<T>,
    pub subspace_err_v: Option<T>,
    /// Internal `D²` diagonal where the solver has one, singular values of
    /// `A·Bᵀ` otherwise.
    pub d_squared: Vec<T>,
    pub v_diag_distance: Option<T>,
    pub sign_agreement: Option<bool>,
}

/// Column header matching [`TraceRecord::to_csv_row`].
pub fn csv_header(rank: usize) -> String {
    let mut header = String::from(
        "iter,cost_rrss,cost_nuclear,stop_value,subspace_err_U,subspace_err_V,\
         v_diag_distance,sign_agreement",
    );
    for i in 1..=rank {
        header.push_str(&format!(",d_sq_{i}"));
    }
    header
}

impl<T: Real> TraceRecord<T> {
    pub fn to_csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            match v {
                Some(v) => v.to_string(),
                None => "NA".to_string(),
            }
        }
        let mut row = format!(
            "{},{},{},{},{},{},{},{}",
            self.iter,
            self.cost_rrss,
            self.cost_nuclear,
            self.stop_value,
            opt(&self.subspace_err_u),
            opt(&self.subspace_err_v),
            opt(&self.v_diag_distance),
            opt(&self.sign_agreement),
        );
        for d in &self.d_squared {
            row.push_str(&format!(",{d}"));
        }
        row
    }
}

/// Observer that turns solver snapshots into [`TraceRecord`]s.
///
/// Without a reference the oracle-dependent columns stay "NA"; with one, the
/// left/right subspace errors and the right-vector drift are filled for
/// solvers that expose their internal bases.
pub struct TraceBuilder<'a, T> {
    x: &'a SparseMatrix<T>,
    lambda: T,
    rank: usize,
    reference: Option<&'a SpectralReference<T>>,
    records: Vec<TraceRecord<T>>,
}

impl<'a, T: Real> TraceBuilder<'a, T> {
    pub fn new(x: &'a SparseMatrix<T>, lambda: T, rank: usize) -> Self {
        TraceBuilder {
            x,
            lambda,
            rank,
            reference: None,
            records: Vec::new(),
        }
    }

    pub fn with_reference(mut self, reference: &'a SpectralReference<T>) -> Result<Self> {
        if reference.s.len() < self.rank {
            return Err(Error::dims(
                "TraceBuilder",
                format!("reference with at least {} singular values", self.rank),
                format!("{}", reference.s.len()),
            ));
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn records(&self) -> &[TraceRecord<T>] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TraceRecord<T>> {
        self.records
    }
}

impl<T: Real> SolverObserver<T> for TraceBuilder<'_, T> {
    fn on_iteration(&mut self, snapshot: &IterationSnapshot<'_, T>) {
        let half = T::from(0.5).unwrap();
        let res = residual_frob_sq(self.x, snapshot.a, snapshot.b)
            .expect("solver snapshots have conforming shapes");
        let cost_rrss = half * res
            + half * self.lambda * (snapshot.a.frob_norm_sq() + snapshot.b.frob_norm_sq());
        let sigma = factored_singular_values(snapshot.a, snapshot.b)
            .expect("solver snapshots have conforming shapes");
        let cost_nuclear = half * res + self.lambda * sigma.iter().copied().sum();

        let subspace_err_u = match (self.reference, snapshot.u) {
            (Some(r), Some(u)) => {
                Some(r.subspace_error_left(u, self.rank).expect("shapes conform"))
            }
            _ => None,
        };
        let subspace_err_v = match (self.reference, snapshot.u_tilde) {
            (Some(r), Some(v)) => Some(
                r.subspace_error_right(v, self.rank)
                    .expect("shapes conform"),
            ),
            _ => None,
        };
        let v_drift = match (self.reference, snapshot.v_raw, snapshot.w_prev) {
            (Some(r), Some(v), Some(w)) => Some(
                v_diag_distance(v, w, r, self.lambda, self.rank).expect("shapes conform"),
            ),
            _ => None,
        };

        self.records.push(TraceRecord {
            iter: snapshot.iter,
            cost_rrss,
            cost_nuclear,
            stop_value: snapshot.stop_value,
            subspace_err_u,
            subspace_err_v,
            d_squared: snapshot
                .d_squared
                .map(|d| d.to_vec())
                .unwrap_or(sigma),
            v_diag_distance: v_drift,
            sign_agreement: snapshot.sign_agreement,
        });
    }
}
