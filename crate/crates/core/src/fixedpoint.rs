//! Scalar dynamics of one singular value under the orthogonalized solver.
//!
//! On a matrix with a single singular value `s`, each full iteration maps the
//! current estimate through
//!
//! ```text
//! f(w) = s²·w / (w·(s + λ) + λ²)
//! ```
//!
//! Everything about solver convergence rates reduces to this map: it has
//! fixed points 0 and `s - λ`, exactly one of which attracts (they trade
//! stability at `λ = s`, where convergence degrades to O(1/k) with a known
//! closed form). The functions here compute orbits, fixed points, the
//! per-case linear contraction constants, and the error envelope of orbits
//! driven by a decaying perturbation, which is how the matrix iteration
//! (where other singular directions leak in) is analyzed.

use crate::{Error, Real, Result};

/// Parameters of the scalar map: the singular value `s` and the
/// regularization strength `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarIteration<T> {
    s: T,
    lambda: T,
}

impl<T: Real> ScalarIteration<T> {
    pub fn new(s: T, lambda: T) -> Result<Self> {
        if !s.is_finite() || s < T::zero() {
            return Err(Error::InvalidParam(format!(
                "ScalarIteration: s must be finite and nonnegative, got {s}"
            )));
        }
        if !lambda.is_finite() || lambda <= T::zero() {
            return Err(Error::InvalidParam(format!(
                "ScalarIteration: lambda must be finite and positive, got {lambda}"
            )));
        }
        Ok(ScalarIteration { s, lambda })
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// The attracting fixed point `(s - λ)₊`.
    pub fn attracting_fixed_point(&self) -> T {
        (self.s - self.lambda).max(T::zero())
    }
}

/// One step of the map.
pub fn step<T: Real>(it: &ScalarIteration<T>, w: T) -> T {
    let ScalarIteration { s, lambda } = *it;
    s * s * w / (w * (s + lambda) + lambda * lambda)
}

/// Orbit `[w₀, f(w₀), ..., f^k(w₀)]` (length `k + 1`).
pub fn iterate<T: Real>(it: &ScalarIteration<T>, w0: T, k: usize) -> Result<Vec<T>> {
    if !w0.is_finite() || w0 < T::zero() {
        return Err(Error::InvalidParam(format!(
            "iterate: w0 must be finite and nonnegative, got {w0}"
        )));
    }
    let mut orbit = Vec::with_capacity(k + 1);
    orbit.push(w0);
    let mut w = w0;
    for _ in 0..k {
        w = step(it, w);
        orbit.push(w);
    }
    Ok(orbit)
}

/// A fixed point of the map with its linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<T> {
    pub value: T,
    pub derivative: T,
    /// `|derivative| < 1`.
    pub stable: bool,
}

/// Both fixed points of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<T> {
    /// At `w = 0`, derivative `s²/λ²`.
    pub at_zero: FixedPoint<T>,
    /// At `w = s - λ` (reported even when negative), derivative `λ²/s²`.
    pub at_gap: FixedPoint<T>,
}

/// Fixed points 0 and `s - λ` with their derivatives `s²/λ²` and `λ²/s²`.
///
/// Exactly one is stable away from `s = λ`; at `s = λ` they collide with
/// derivative 1 and neither is reported stable.
pub fn fixed_points<T: Real>(it: &ScalarIteration<T>) -> FixedPointReport<T> {
    let ScalarIteration { s, lambda } = *it;
    let d0 = (s / lambda) * (s / lambda);
    let dgap = if s == T::zero() {
        T::infinity()
    } else {
        (lambda / s) * (lambda / s)
    };
    FixedPointReport {
        at_zero: FixedPoint {
            value: T::zero(),
            derivative: d0,
            stable: d0 < T::one(),
        },
        at_gap: FixedPoint {
            value: s - lambda,
            derivative: dgap,
            stable: dgap < T::one(),
        },
    }
}

/// Closed-form orbit in the marginal case `s = λ`: `w_k = λ·w₀/(2k·w₀ + λ)`.
pub fn closed_form_equal_case<T: Real>(lambda: T, w0: T, k: usize) -> Result<T> {
    if lambda <= T::zero() || !lambda.is_finite() {
        return Err(Error::InvalidParam(format!(
            "closed_form_equal_case: lambda must be positive, got {lambda}"
        )));
    }
    if w0 <= T::zero() || !w0.is_finite() {
        return Err(Error::InvalidParam(format!(
            "closed_form_equal_case: w0 must be positive, got {w0}"
        )));
    }
    let two_k = T::from(2 * k).unwrap();
    Ok(lambda * w0 / (two_k * w0 + lambda))
}

/// Per-step contraction factor toward the attracting fixed point, valid for
/// the whole orbit started at `w0`:
///
/// * `λ > s`: `s²/λ²` (decay to 0),
/// * `λ < s`, `w0 < s - λ`: `λ²/(w0·(s + λ) + λ²)` (approach from below),
/// * `λ < s`, `w0 >= s - λ`: `λ²/s²` (approach from above).
///
/// Errors at `s = λ`, where no linear contraction exists.
pub fn contraction_constant<T: Real>(it: &ScalarIteration<T>, w0: T) -> Result<T> {
    let ScalarIteration { s, lambda } = *it;
    if w0 <= T::zero() || !w0.is_finite() {
        return Err(Error::InvalidParam(format!(
            "contraction_constant: w0 must be positive, got {w0}"
        )));
    }
    if s == lambda {
        return Err(Error::InvalidParam(
            "contraction_constant: undefined at s = lambda (sublinear convergence)".to_string(),
        ));
    }
    if lambda > s {
        return Ok((s / lambda) * (s / lambda));
    }
    let gap = s - lambda;
    if w0 < gap {
        Ok(lambda * lambda / (w0 * (s + lambda) + lambda * lambda))
    } else {
        Ok((lambda / s) * (lambda / s))
    }
}

/// A perturbed orbit specification: `w_{k+1} = f(w_k) + e_k` with
/// `|e_{k+1}| <= a·|e_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec<T> {
    pub w0: T,
    /// Decay factor of the perturbation magnitudes, in (0, 1).
    pub a: T,
    pub perturbations: Vec<T>,
}

/// A perturbed orbit together with its theoretical error envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedOrbit<T> {
    /// `w₀ ..= w_K` where `K = perturbations.len()`.
    pub orbit: Vec<T>,
    /// `bounds[k]` bounds `|w_{k+1} - (s-λ)₊|`; see [`perturbation_bound`],
    /// plus the decayed initial error `c^{k+1}·|w₀ - (s-λ)₊|`.
    pub bounds: Vec<T>,
}

/// Accumulated-perturbation envelope `|e₀|·(a^{k+1} - c^{k+1})/(a - c)`,
/// with the limit `(k+1)·c^k·|e₀|` when `a = c`.
pub fn perturbation_bound<T: Real>(e0_abs: T, a: T, c: T, k: usize) -> T {
    let kp1 = k as i32 + 1;
    if a == c {
        T::from(kp1).unwrap() * c.powi(k as i32) * e0_abs
    } else {
        e0_abs * (a.powi(kp1) - c.powi(kp1)) / (a - c)
    }
}

/// Runs the perturbed orbit and returns it with per-step error bounds.
///
/// The contraction constant is taken at `w0`; the perturbation sequence must
/// actually decay at rate `a` and must keep the orbit positive.
pub fn perturbed_iterate<T: Real>(
    it: &ScalarIteration<T>,
    spec: &PerturbationSpec<T>,
) -> Result<PerturbedOrbit<T>> {
    let PerturbationSpec { w0, a, ref perturbations } = *spec;
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::InvalidParam(format!(
            "perturbed_iterate: decay factor a must be in (0, 1), got {a}"
        )));
    }
    for pair in perturbations.windows(2) {
        if pair[1].abs() > a * pair[0].abs() {
            return Err(Error::InvalidParam(format!(
                "perturbed_iterate: |e_(k+1)| <= a·|e_k| violated ({} > {} * {})",
                pair[1].abs(),
                a,
                pair[0].abs()
            )));
        }
    }
    let c = contraction_constant(it, w0)?;
    let x_star = it.attracting_fixed_point();
    let e0_abs = perturbations.first().map_or(T::zero(), |e| e.abs());

    let mut orbit = Vec::with_capacity(perturbations.len() + 1);
    let mut bounds = Vec::with_capacity(perturbations.len());
    orbit.push(w0);
    let mut w = w0;
    for (k, &e) in perturbations.iter().enumerate() {
        w = step(it, w) + e;
        if w < T::zero() || !w.is_finite() {
            return Err(Error::Breakdown {
                step: k,
                reason: format!("perturbed orbit left the domain (w = {w})"),
            });
        }
        orbit.push(w);
        let decay = c.powi(k as i32 + 1) * (w0 - x_star).abs();
        bounds.push(perturbation_bound(e0_abs, a, c, k) + decay);
    }
    Ok(PerturbedOrbit { orbit, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn it(s: f64, lambda: f64) -> ScalarIteration<f64> {
        ScalarIteration::new(s, lambda).unwrap()
    }

    #[test]
    fn one_step_from_one_at_s_two() {
        // 4·1/(1·2.5 + 0.25) = 16/11.
        let got = step(&it(2.0, 0.5), 1.0);
        assert!((got - 16.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_case_matches_closed_form() {
        let orbit = iterate(&it(1.0, 1.0), 1.0, 3).unwrap();
        assert!((orbit[3] - 1.0 / 7.0).abs() < 1e-16);
        assert_eq!(
            closed_form_equal_case(1.0, 1.0, 3).unwrap(),
            1.0 / 7.0,
        );
        // λ = 2, w0 = 0.5, k = 10 → 2·0.5/(20·0.5 + 2) = 1/12.
        assert!((closed_form_equal_case(2.0f64, 0.5, 10).unwrap() - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn fixed_points_for_subcritical_s() {
        let report = fixed_points(&it(0.3, 0.5));
        assert_eq!(report.at_zero.value, 0.0);
        assert!((report.at_zero.derivative - 0.36).abs() < 1e-15);
        assert!(report.at_zero.stable);
        assert!((report.at_gap.value - (-0.2)).abs() < 1e-15);
        assert!((report.at_gap.derivative - 25.0 / 9.0).abs() < 1e-13);
        assert!(!report.at_gap.stable);
    }

    #[test]
    fn stability_swaps_when_s_exceeds_lambda() {
        let report = fixed_points(&it(2.0, 0.5));
        assert!(!report.at_zero.stable);
        assert!(report.at_gap.stable);
        assert!((report.at_gap.value - 1.5).abs() < 1e-15);
        assert!((report.at_gap.derivative - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn contraction_constants_per_case() {
        // λ > s.
        assert!((contraction_constant(&it(1.0, 2.0), 1.0).unwrap() - 0.25).abs() < 1e-15);
        // λ < s, below the gap: 0.25/(0.5·2.5 + 0.25) = 1/6.
        assert!(
            (contraction_constant(&it(2.0, 0.5), 0.5).unwrap() - 1.0 / 6.0).abs() < 1e-15
        );
        // λ < s, at or above the gap: λ²/s².
        assert!((contraction_constant(&it(2.0, 0.5), 2.0).unwrap() - 0.0625).abs() < 1e-15);
        assert!(contraction_constant(&it(1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn one_step_contraction_holds_exactly() {
        // f(w) - x* = λ²/(w(s+λ)+λ²)·(w - x*), so the advertised constant
        // bounds the first step tightly.
        for &(s, lambda, w0) in &[(2.0, 0.5, 0.5), (2.0, 0.5, 3.0), (0.4, 1.1, 0.9)] {
            let iter = it(s, lambda);
            let c = contraction_constant(&iter, w0).unwrap();
            let x = iter.attracting_fixed_point();
            let lhs = (step(&iter, w0) - x).abs();
            assert!(lhs <= c * (w0 - x).abs() * (1.0 + 1e-15));
        }
    }

    #[test]
    fn perturbation_bound_closed_form_and_limit() {
        assert!((perturbation_bound(1.0f64, 0.25, 0.5, 1) - 0.75).abs() < 1e-15);
        // a = c limit: (k+1)·c^k·|e₀|.
        assert!((perturbation_bound(2.0f64, 0.5, 0.5, 3) - 4.0 * 0.125 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn perturbed_orbit_respects_envelope() {
        let iter = it(2.0, 0.5);
        let spec = PerturbationSpec {
            w0: 0.4,
            a: 0.5,
            perturbations: (0..30).map(|k| 0.05 * 0.4_f64.powi(k)).collect(),
        };
        let run = perturbed_iterate(&iter, &spec).unwrap();
        let x = iter.attracting_fixed_point();
        for (k, bound) in run.bounds.iter().enumerate() {
            let err = (run.orbit[k + 1] - x).abs();
            assert!(err <= bound * (1.0 + 1e-12), "step {k}: {err} > {bound}");
        }
    }

    #[test]
    fn perturbed_iterate_validates_inputs() {
        let iter = it(2.0, 0.5);
        let bad_decay = PerturbationSpec {
            w0: 0.4,
            a: 0.5,
            perturbations: vec![0.1, 0.09],
        };
        assert!(perturbed_iterate(&iter, &bad_decay).is_err());
        let bad_a = PerturbationSpec {
            w0: 0.4,
            a: 1.0,
            perturbations: vec![],
        };
        assert!(perturbed_iterate(&iter, &bad_a).is_err());
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(ScalarIteration::new(-1.0, 1.0).is_err());
        assert!(ScalarIteration::new(1.0, 0.0).is_err());
        assert!(ScalarIteration::new(f64::NAN, 1.0).is_err());
    }
}
