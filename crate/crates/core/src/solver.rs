//! The three soft-SVD solvers.
//!
//! * [`als_run`]: alternating ridge regressions on the raw factors. Each
//!   half-step is a closed-form minimizer, so the cost is monotone, but the
//!   factors carry no spectral structure.
//! * [`rrss_run`]: the orthogonalized iteration. The state is kept factored
//!   as `A = U·D` with `U` orthonormal and `D` diagonal, so each half-step is
//!   a diagonal ridge rescale followed by a small re-factorization, and `D²`
//!   converges to the soft-thresholded spectrum directly.
//! * [`oracle_soft_svd`]: the non-iterative reference, a dense SVD followed
//!   by soft thresholding.
//!
//! Every re-factorization inside the orthogonalized iteration leaves the
//! singular-vector pair signs arbitrary. The iteration is invariant in the
//! subspaces it tracks, but the stopping rule compares raw iterates, and with
//! uncontrolled signs the iterates need never settle. [`SignPolicy`] makes
//! the choice explicit; [`SignPolicy::ColumnSum`] is the convention that
//! provably stabilizes the iterates and is the default.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics;
use crate::linalg::{
    random_orthonormal, ridge_solve, spd_ridge_solve, thin_svd, DenseMatrix, DiagonalMatrix,
    SignMatrix, SparseMatrix,
};
use crate::{Error, Real, Result};

/// Fixed offset added to the master seed for the factor initialization
/// stream.
pub const SEED_OFFSET_INIT: u64 = 1;
/// Fixed offset added to the master seed for the random-sign stream.
pub const SEED_OFFSET_SIGNS: u64 = 2;

/// `D²` entries at or above this count toward [`SoftSvdSolution::effective_rank`].
pub const EFFECTIVE_RANK_TOL: f64 = 1e-12;

/// How singular-vector signs are fixed after each internal factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignPolicy {
    /// Flip each pair so the right singular vectors have nonnegative column
    /// sums. Stabilizes the iterates; the default.
    ColumnSum,
    /// Keep whatever the (deterministic) SVD kernel produced.
    Raw,
    /// Independent uniform ±1 per column per factorization, from a ChaCha8
    /// stream with this seed. Models a sign-nondeterministic SVD backend.
    Random(u64),
    /// The same fixed signs at every factorization.
    Fixed(SignMatrix),
    /// Separate fixed signs for the two half-steps: the first applied after
    /// the `B`-side factorization, the second after the `A`-side one. A
    /// mismatched pair pins the iteration to a sign-twisted stationary
    /// point whose cost strictly exceeds the optimum.
    FixedPair(SignMatrix, SignMatrix),
}

/// Solver parameters shared by [`als_run`] and [`rrss_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub rank: usize,
    pub lambda: T,
    pub tol: T,
    pub max_iters: usize,
    /// Master seed; the initialization stream is derived from it by
    /// [`SEED_OFFSET_INIT`]. Layers assembling a config derive the
    /// [`SignPolicy::Random`] seed with [`SEED_OFFSET_SIGNS`].
    pub seed: u64,
    pub sign_policy: SignPolicy,
    pub trace_enabled: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(rank: usize, lambda: T) -> Self {
        SolverConfig {
            rank,
            lambda,
            tol: T::from(1e-9).unwrap(),
            max_iters: 1000,
            seed: 0,
            sign_policy: SignPolicy::ColumnSum,
            trace_enabled: false,
        }
    }

    pub fn validate(&self, nrows: usize, ncols: usize) -> Result<()> {
        let p = nrows.min(ncols);
        if self.rank == 0 || self.rank > p {
            return Err(Error::InvalidParam(format!(
                "rank must satisfy 1 <= rank <= min(n, m) = {p}, got {}",
                self.rank
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= T::zero() {
            return Err(Error::InvalidParam(format!(
                "lambda must be finite and positive, got {}",
                self.lambda
            )));
        }
        if !self.tol.is_finite() || self.tol <= T::zero() {
            return Err(Error::InvalidParam(format!(
                "tol must be finite and positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be at least 1".into()));
        }
        let fixed_dims = match &self.sign_policy {
            SignPolicy::Fixed(w) => vec![w.dim()],
            SignPolicy::FixedPair(w_tilde, w) => vec![w_tilde.dim(), w.dim()],
            _ => vec![],
        };
        for dim in fixed_dims {
            if dim != self.rank {
                return Err(Error::dims(
                    "SolverConfig",
                    format!("fixed sign pattern of length {}", self.rank),
                    format!("length {dim}"),
                ));
            }
        }
        Ok(())
    }
}

/// Full state of the orthogonalized iteration after a completed step.
///
/// `a` and `b` are the two ridge-update outputs, the factor pair whose cost
/// the limit theory describes. `u` and `u_tilde` are the retained orthonormal
/// bases with the policy signs already applied; the signed products `u·d` and
/// `u_tilde·d_tilde` are what the next half-step consumes, and they agree
/// with `a`/`b` up to the singular-vector sign bookkeeping.
/// `v_last`/`v_tilde_last` keep the raw (pre-policy) right singular vectors
/// of the two internal factorizations and `w_last`/`w_tilde_last` the signs
/// the policy applied to them; diagnostics compare these against theory.
#[derive(Debug, Clone)]
pub struct SolverState<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub u: DenseMatrix<T>,
    pub u_tilde: DenseMatrix<T>,
    pub d: DiagonalMatrix<T>,
    pub d_tilde: DiagonalMatrix<T>,
    pub v_last: DenseMatrix<T>,
    pub v_tilde_last: DenseMatrix<T>,
    pub w_last: SignMatrix,
    pub w_tilde_last: SignMatrix,
    pub iter: usize,
    pub stop_value: T,
}

/// Optional warm start for the orthogonalized iteration.
///
/// `u0` replaces the seeded random orthonormal initialization, signs
/// included: the first half-step uses `A₀ = u0·d0`. `d0` defaults to the
/// identity, matching the cold-start convention.
#[derive(Debug, Clone)]
pub struct WarmStart<T> {
    pub u0: DenseMatrix<T>,
    pub d0: Option<DiagonalMatrix<T>>,
}

/// A converged (or iteration-capped) factor pair.
#[derive(Debug, Clone)]
pub struct SoftSvdSolution<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    /// Diagonal of the implied `D²`: the squared internal scale for the
    /// orthogonalized solver, the singular values of `A·Bᵀ` for the others.
    pub d_squared: DiagonalMatrix<T>,
    pub iters: usize,
    pub converged: bool,
    pub final_cost: T,
}

impl<T: Real> SoftSvdSolution<T> {
    /// Number of `D²` entries at or above [`EFFECTIVE_RANK_TOL`].
    pub fn effective_rank(&self) -> usize {
        let tol = T::from(EFFECTIVE_RANK_TOL).unwrap();
        self.d_squared.diag().iter().filter(|&&d| d >= tol).count()
    }
}

/// Per-iteration view handed to observers (trace writers, tests).
pub struct IterationSnapshot<'a, T> {
    pub iter: usize,
    pub a: &'a DenseMatrix<T>,
    pub b: &'a DenseMatrix<T>,
    pub stop_value: T,
    /// `D²` diagonal; absent for solvers without an internal `D`.
    pub d_squared: Option<&'a [T]>,
    pub u: Option<&'a DenseMatrix<T>>,
    pub u_tilde: Option<&'a DenseMatrix<T>>,
    /// Raw right singular vectors of this iteration's first (B-side)
    /// factorization.
    pub v_raw: Option<&'a DenseMatrix<T>>,
    /// Signs applied at the previous iteration's A-side factorization, which
    /// shaped this iteration's input.
    pub w_prev: Option<&'a SignMatrix>,
    /// Whether the two sign matrices applied this iteration agree.
    pub sign_agreement: Option<bool>,
}

pub trait SolverObserver<T> {
    fn on_iteration(&mut self, snapshot: &IterationSnapshot<'_, T>);
}

impl<T, F: FnMut(&IterationSnapshot<'_, T>)> SolverObserver<T> for F {
    fn on_iteration(&mut self, snapshot: &IterationSnapshot<'_, T>) {
        self(snapshot)
    }
}

/// Relative max-norm change with the 0/0 guard: an exactly unchanged zero
/// iterate contributes 0, a changed-to-zero iterate contributes infinity.
fn rel_change<T: Real>(current: &DenseMatrix<T>, previous: &DenseMatrix<T>) -> Result<T> {
    let diff = current.max_abs_diff(previous)?;
    let denom = current.max_norm();
    if denom == T::zero() {
        Ok(if diff == T::zero() { T::zero() } else { T::infinity() })
    } else {
        Ok(diff / denom)
    }
}

fn ensure_finite<T: Real>(m: &DenseMatrix<T>, step: usize, what: &str) -> Result<()> {
    if let Some((row, col)) = m.first_non_finite() {
        return Err(Error::Breakdown {
            step,
            reason: format!("{what} became non-finite at ({row}, {col})"),
        });
    }
    Ok(())
}

/// Materialized sign source for one run. [`rrss_step`] pulls one sign matrix
/// per factorization, `B`-side first, so a stream sees an alternating
/// `B, A, B, A, …` sequence of calls.
#[derive(Debug)]
pub enum SignStream {
    ColumnSum,
    Raw,
    Random(ChaCha8Rng),
    Fixed(SignMatrix),
    FixedPair {
        b_half: SignMatrix,
        a_half: SignMatrix,
        a_next: bool,
    },
}

impl SignStream {
    pub fn new(policy: &SignPolicy, rank: usize) -> Result<Self> {
        let check = |w: &SignMatrix| {
            if w.dim() != rank {
                return Err(Error::dims(
                    "SignStream",
                    format!("fixed sign pattern of length {rank}"),
                    format!("length {}", w.dim()),
                ));
            }
            Ok(())
        };
        Ok(match policy {
            SignPolicy::ColumnSum => SignStream::ColumnSum,
            SignPolicy::Raw => SignStream::Raw,
            SignPolicy::Random(seed) => SignStream::Random(ChaCha8Rng::seed_from_u64(*seed)),
            SignPolicy::Fixed(w) => {
                check(w)?;
                SignStream::Fixed(w.clone())
            }
            SignPolicy::FixedPair(w_tilde, w) => {
                check(w_tilde)?;
                check(w)?;
                SignStream::FixedPair {
                    b_half: w_tilde.clone(),
                    a_half: w.clone(),
                    a_next: false,
                }
            }
        })
    }

    /// Signs for one factorization whose raw right singular vectors are `v`.
    /// A zero column sum counts as positive.
    fn next<T: Real>(&mut self, v: &DenseMatrix<T>) -> SignMatrix {
        let rank = v.ncols();
        match self {
            SignStream::ColumnSum => {
                let signs = (0..rank)
                    .map(|j| {
                        let sum: T = (0..v.nrows()).map(|i| v[(i, j)]).sum();
                        if sum < T::zero() {
                            -1
                        } else {
                            1
                        }
                    })
                    .collect();
                SignMatrix::from_signs(signs).expect("signs are ±1")
            }
            SignStream::Raw => SignMatrix::identity(rank),
            SignStream::Random(rng) => {
                let signs = (0..rank)
                    .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                    .collect();
                SignMatrix::from_signs(signs).expect("signs are ±1")
            }
            SignStream::Fixed(w) => w.clone(),
            SignStream::FixedPair { b_half, a_half, a_next } => {
                let w = if *a_next { a_half.clone() } else { b_half.clone() };
                *a_next = !*a_next;
                w
            }
        }
    }
}

/// Initial state for the orthogonalized iteration: `D = I`, signs positive,
/// `U` seeded random orthonormal unless warm-started, `B = 0`.
pub fn rrss_init<T: Real>(
    x: &SparseMatrix<T>,
    cfg: &SolverConfig<T>,
    warm: Option<WarmStart<T>>,
) -> Result<SolverState<T>> {
    cfg.validate(x.nrows(), x.ncols())?;
    let (n, m, r) = (x.nrows(), x.ncols(), cfg.rank);

    let (u0, d0) = match warm {
        None => (
            random_orthonormal::<T>(n, r, cfg.seed.wrapping_add(SEED_OFFSET_INIT))?,
            DiagonalMatrix::identity(r),
        ),
        Some(WarmStart { u0, d0 }) => {
            if u0.nrows() != n || u0.ncols() != r {
                return Err(Error::dims(
                    "rrss_init",
                    format!("warm-start U of shape {n}x{r}"),
                    format!("{}x{}", u0.nrows(), u0.ncols()),
                ));
            }
            if let Some((row, col)) = u0.first_non_finite() {
                return Err(Error::NonFinite { op: "rrss_init", row, col });
            }
            let d0 = d0.unwrap_or_else(|| DiagonalMatrix::identity(r));
            if d0.dim() != r {
                return Err(Error::dims(
                    "rrss_init",
                    format!("warm-start D of dim {r}"),
                    format!("dim {}", d0.dim()),
                ));
            }
            if d0.diag().iter().any(|&d| !d.is_finite() || d < T::zero()) {
                return Err(Error::InvalidParam(
                    "warm-start D entries must be finite and nonnegative".into(),
                ));
            }
            (u0, d0)
        }
    };

    let a0 = u0.scaled_cols(d0.diag())?;
    Ok(SolverState {
        a: a0,
        b: DenseMatrix::zeros(m, r),
        u: u0,
        u_tilde: DenseMatrix::zeros(m, r),
        d: d0,
        d_tilde: DiagonalMatrix::identity(r),
        v_last: DenseMatrix::eye(r, r),
        v_tilde_last: DenseMatrix::eye(r, r),
        w_last: SignMatrix::identity(r),
        w_tilde_last: SignMatrix::identity(r),
        iter: 0,
        stop_value: T::infinity(),
    })
}

/// One full iteration of the orthogonalized solver.
///
/// The two mirrored half-steps each do: diagonal ridge rescale of the
/// cross-product against the signed basis times `D`, thin SVD of the ridge
/// output times the current `D`, `D` update to the square root of the new
/// singular values, policy signs applied to the retained basis. The ridge
/// outputs themselves are stored as `a` and `b`: they are the factor pair
/// the limit theory prices. The stopping value compares the signed products
/// `U·D` and `Ũ·D̃` against their entry values, which is what makes
/// uncontrolled signs visible as non-convergence.
pub fn rrss_step<T: Real>(
    x: &SparseMatrix<T>,
    state: &mut SolverState<T>,
    cfg: &SolverConfig<T>,
    signs: &mut SignStream,
) -> Result<()> {
    let lambda = cfg.lambda;
    let step = state.iter + 1;

    // B ← Xᵀ (U·D) (D² + λI)⁻¹.
    let a_entry = state.u.scaled_cols(state.d.diag())?;
    let b_entry = state.u_tilde.scaled_cols(state.d_tilde.diag())?;
    let xta = x.spmm(&a_entry, true)?;
    let b_new = ridge_solve(&xta, &state.d.squared(), lambda)?;
    ensure_finite(&b_new, step, "B update")?;

    let bd = b_new.scaled_cols(state.d.diag())?;
    let svd_b = thin_svd(&bd)?;
    let d_tilde = DiagonalMatrix::new(svd_b.s.clone()).sqrt();
    let w_tilde = signs.next(&svd_b.v);
    let mut u_tilde = svd_b.u;
    u_tilde.scale_cols(&w_tilde.factors())?;
    state.b = b_new;
    state.u_tilde = u_tilde;
    state.v_tilde_last = svd_b.v;
    state.w_tilde_last = w_tilde;
    state.d_tilde = d_tilde;

    // A ← X (Ũ·D̃) (D̃² + λI)⁻¹, mirrored.
    let b_signed = state.u_tilde.scaled_cols(state.d_tilde.diag())?;
    let xb = x.spmm(&b_signed, false)?;
    let a_new = ridge_solve(&xb, &state.d_tilde.squared(), lambda)?;
    ensure_finite(&a_new, step, "A update")?;

    let ad = a_new.scaled_cols(state.d_tilde.diag())?;
    let svd_a = thin_svd(&ad)?;
    let d = DiagonalMatrix::new(svd_a.s.clone()).sqrt();
    let w = signs.next(&svd_a.v);
    let mut u = svd_a.u;
    u.scale_cols(&w.factors())?;
    state.a = a_new;
    state.u = u;
    state.v_last = svd_a.v;
    state.w_last = w;
    state.d = d;

    state.iter = step;
    let a_signed = state.u.scaled_cols(state.d.diag())?;
    state.stop_value = rel_change(&a_signed, &a_entry)? + rel_change(&b_signed, &b_entry)?;
    Ok(())
}

/// Runs the orthogonalized solver from a cold start.
pub fn rrss_run<T: Real>(x: &SparseMatrix<T>, cfg: &SolverConfig<T>) -> Result<SoftSvdSolution<T>> {
    rrss_run_observed(x, cfg, None, None::<&mut NoObserver>)
}

/// An observer that ignores everything, for plain runs.
pub struct NoObserver;

impl<T> SolverObserver<T> for NoObserver {
    fn on_iteration(&mut self, _snapshot: &IterationSnapshot<'_, T>) {}
}

/// Runs the orthogonalized solver with an optional warm start and observer.
pub fn rrss_run_observed<T: Real, O: SolverObserver<T> + ?Sized>(
    x: &SparseMatrix<T>,
    cfg: &SolverConfig<T>,
    warm: Option<WarmStart<T>>,
    mut observer: Option<&mut O>,
) -> Result<SoftSvdSolution<T>> {
    let mut state = rrss_init(x, cfg, warm)?;
    let mut signs = SignStream::new(&cfg.sign_policy, cfg.rank)?;

    let mut converged = false;
    while state.iter < cfg.max_iters {
        let w_prev = state.w_last.clone();
        rrss_step(x, &mut state, cfg, &mut signs)?;
        if let Some(obs) = observer.as_deref_mut() {
            let d_squared: Vec<T> = state.d.diag().iter().map(|&d| d * d).collect();
            obs.on_iteration(&IterationSnapshot {
                iter: state.iter,
                a: &state.a,
                b: &state.b,
                stop_value: state.stop_value,
                d_squared: Some(&d_squared),
                u: Some(&state.u),
                u_tilde: Some(&state.u_tilde),
                v_raw: Some(&state.v_tilde_last),
                w_prev: Some(&w_prev),
                sign_agreement: Some(state.w_last == state.w_tilde_last),
            });
        }
        if state.stop_value <= cfg.tol {
            converged = true;
            break;
        }
    }

    let final_cost = diagnostics::cost_rrss(x, &state.a, &state.b, cfg.lambda)?;
    Ok(SoftSvdSolution {
        d_squared: state.d.squared(),
        a: state.a,
        b: state.b,
        iters: state.iter,
        converged,
        final_cost,
    })
}

/// Runs the alternating ridge solver from its seeded random init.
pub fn als_run<T: Real>(x: &SparseMatrix<T>, cfg: &SolverConfig<T>) -> Result<SoftSvdSolution<T>> {
    als_run_observed(x, cfg, None::<&mut NoObserver>)
}

/// Alternating ridge regressions: `B ← XᵀA(AᵀA + λI)⁻¹`, then the mirror
/// image for `A`, until the relative-change stopping rule fires.
pub fn als_run_observed<T: Real, O: SolverObserver<T> + ?Sized>(
    x: &SparseMatrix<T>,
    cfg: &SolverConfig<T>,
    mut observer: Option<&mut O>,
) -> Result<SoftSvdSolution<T>> {
    cfg.validate(x.nrows(), x.ncols())?;
    let (m, r) = (x.ncols(), cfg.rank);

    let mut a: DenseMatrix<T> =
        random_orthonormal(x.nrows(), r, cfg.seed.wrapping_add(SEED_OFFSET_INIT))?;
    let mut b = DenseMatrix::<T>::zeros(m, r);
    let mut converged = false;
    let mut iters = 0;

    while iters < cfg.max_iters {
        let step = iters + 1;
        let a_entry = a.clone();
        let b_entry = b.clone();

        let xta = x.spmm(&a, true)?;
        b = spd_ridge_solve(&xta, &a.gram(), cfg.lambda)?;
        ensure_finite(&b, step, "B update")?;

        let xb = x.spmm(&b, false)?;
        a = spd_ridge_solve(&xb, &b.gram(), cfg.lambda)?;
        ensure_finite(&a, step, "A update")?;

        iters = step;
        let stop_value = rel_change(&a, &a_entry)? + rel_change(&b, &b_entry)?;
        if let Some(obs) = observer.as_deref_mut() {
            obs.on_iteration(&IterationSnapshot {
                iter: iters,
                a: &a,
                b: &b,
                stop_value,
                d_squared: None,
                u: None,
                u_tilde: None,
                v_raw: None,
                w_prev: None,
                sign_agreement: None,
            });
        }
        if stop_value <= cfg.tol {
            converged = true;
            break;
        }
    }

    let final_cost = diagnostics::cost_rrss(x, &a, &b, cfg.lambda)?;
    let sigma = diagnostics::factored_singular_values(&a, &b)?;
    Ok(SoftSvdSolution {
        a,
        b,
        d_squared: DiagonalMatrix::new(sigma),
        iters,
        converged,
        final_cost,
    })
}

/// Closed-form solution: dense SVD of `X` followed by soft thresholding.
///
/// `A = U·D·I_{p×r}`, `B = V·D·I_{p×r}` with `D = sqrt((S - λI)₊)`; this is
/// the global optimum the iterative solvers are measured against.
pub fn oracle_soft_svd<T: Real>(
    x: &DenseMatrix<T>,
    rank: usize,
    lambda: T,
) -> Result<SoftSvdSolution<T>> {
    let (n, m) = (x.nrows(), x.ncols());
    let p = n.min(m);
    if rank == 0 || rank > p {
        return Err(Error::InvalidParam(format!(
            "oracle_soft_svd: rank must satisfy 1 <= rank <= min(n, m) = {p}, got {rank}"
        )));
    }
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "oracle_soft_svd: lambda must be finite and positive, got {lambda}"
        )));
    }

    // Full (thin) SVD, transposing when the input is wide.
    let (u_full, s, v_full) = if n >= m {
        let svd = thin_svd(x)?;
        (svd.u, svd.s, svd.v)
    } else {
        let svd = thin_svd(&x.transpose())?;
        (svd.v, svd.s, svd.u)
    };

    let d: Vec<T> = s
        .iter()
        .take(rank)
        .map(|&sv| (sv - lambda).max(T::zero()).sqrt())
        .collect();
    let a = DenseMatrix::from_fn(n, rank, |i, j| u_full[(i, j)] * d[j]);
    let b = DenseMatrix::from_fn(m, rank, |i, j| v_full[(i, j)] * d[j]);
    let d_squared: Vec<T> = d.iter().map(|&v| v * v).collect();

    let half = T::from(0.5).unwrap();
    let mut cost = T::zero();
    for (i, &sv) in s.iter().enumerate() {
        if i < rank {
            let dsq = d_squared[i];
            cost = cost + half * (sv - dsq) * (sv - dsq) + lambda * dsq;
        } else {
            cost = cost + half * sv * sv;
        }
    }

    Ok(SoftSvdSolution {
        a,
        b,
        d_squared: DiagonalMatrix::new(d_squared),
        iters: 0,
        converged: true,
        final_cost: cost,
    })
}
