//! Equilibria, spectral decay and the periodic peak solver.
//!
//! For a two-state matrix with entry probability `q` (into the focus state)
//! and exit probability `r`, the focus share `x_t` satisfies
//! `x_{t+1} − e = λ (x_t − e)` with `e = q / (q + r)` and `λ = 1 − q − r`.
//! Under a periodic schedule the share just after an intervention (`a`) and
//! just before the next one (`b`) satisfy
//!
//! ```text
//! b − e = (a − e) · λ^(T−1)
//! a     = q_I + (1 − q_I − r_I) · b
//! ```
//!
//! which is a 2×2 linear system with a closed-form solution.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::ecm::{StateDistribution, TransitionMatrix};

/// L1 distance between successive power-iteration iterates.
pub const POWER_TOLERANCE: f64 = 1e-13;
pub const POWER_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("`{condition}` has no unique attracting equilibrium: {reason}")]
    NoUniqueEquilibrium { condition: String, reason: String },
    #[error("power iteration on `{condition}` did not converge in {iterations} iterations")]
    NoConvergence { condition: String, iterations: usize },
    #[error("periodic peak system is singular")]
    Singular,
    #[error("periodic peaks need two-state matrices, got {0} states")]
    NotTwoState(usize),
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("rest and intervention matrices use different state spaces")]
    SpaceMismatch,
}

impl AnalyticError {
    /// True when the solver failed rather than the input being malformed.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            AnalyticError::NoUniqueEquilibrium { .. } | AnalyticError::NoConvergence { .. } | AnalyticError::Singular
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumMethod {
    #[serde(rename = "closed_form_2state")]
    ClosedForm2State,
    LinearSolve,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    /// Shares, summing to 1.
    pub distribution: StateDistribution,
    pub engaged_ratio: f64,
    pub method: EquilibriumMethod,
    /// Max-norm of `M v − v`.
    pub residual: f64,
}

fn residual(matrix: &TransitionMatrix, v: &[f64]) -> f64 {
    matrix
        .apply_slice(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn finish(matrix: &TransitionMatrix, v: Vec<f64>, method: EquilibriumMethod) -> EquilibriumResult {
    let s: f64 = v.iter().sum();
    let v: Vec<f64> = v.into_iter().map(|x| x / s).collect();
    let res = residual(matrix, &v);
    let distribution = StateDistribution::new(matrix.space().clone(), v).expect("shares are a valid distribution");
    EquilibriumResult {
        engaged_ratio: distribution.focus_ratio(),
        distribution,
        method,
        residual: res,
    }
}

/// Stationary distribution of `matrix`.
///
/// Two states use `x = q / (q + r)`. Larger chains must be irreducible; they
/// are solved as `(M − I) v = 0, Σ v = 1` with power iteration as fallback.
pub fn equilibrium(matrix: &TransitionMatrix) -> Result<EquilibriumResult, AnalyticError> {
    let p = matrix.dim();
    let no_unique = |reason: &str| AnalyticError::NoUniqueEquilibrium {
        condition: matrix.condition().to_string(),
        reason: reason.to_string(),
    };
    if let Some((q, r)) = matrix.two_state_rates() {
        if q + r == 0.0 {
            return Err(no_unique("both states are absorbing (q = r = 0)"));
        }
        if q + r >= 2.0 {
            return Err(no_unique("the chain alternates deterministically (|λ| = 1)"));
        }
        let x = q / (q + r);
        let f = matrix.space().focus();
        let mut v = vec![0.0; 2];
        v[f] = x;
        v[1 - f] = 1.0 - x;
        return Ok(finish(matrix, v, EquilibriumMethod::ClosedForm2State));
    }

    if !is_irreducible(matrix) {
        return Err(no_unique("reducible chain"));
    }
    let mut a = DMatrix::from_fn(p, p, |i, j| matrix.get(i, j) - if i == j { 1.0 } else { 0.0 });
    for j in 0..p {
        a[(p - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(p);
    rhs[p - 1] = 1.0;
    if let Some(v) = a.full_piv_lu().solve(&rhs) {
        let v: Vec<f64> = v.iter().copied().collect();
        if v.iter().all(|x| *x >= -1e-14) {
            let v = v.into_iter().map(|x| x.max(0.0)).collect();
            let out = finish(matrix, v, EquilibriumMethod::LinearSolve);
            if out.residual <= 1e-12 {
                return Ok(out);
            }
        }
    }
    power_iteration(matrix)
}

/// Uniform start, stop when successive iterates are within [`POWER_TOLERANCE`]
/// in L1.
pub fn power_iteration(matrix: &TransitionMatrix) -> Result<EquilibriumResult, AnalyticError> {
    let p = matrix.dim();
    let mut v = vec![1.0 / p as f64; p];
    for _ in 0..POWER_MAX_ITER {
        let next = matrix.apply_slice(&v);
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if diff <= POWER_TOLERANCE {
            return Ok(finish(matrix, v, EquilibriumMethod::PowerIteration));
        }
    }
    Err(AnalyticError::NoConvergence {
        condition: matrix.condition().to_string(),
        iterations: POWER_MAX_ITER,
    })
}

fn is_irreducible(matrix: &TransitionMatrix) -> bool {
    let p = matrix.dim();
    let reach = |forward: bool| {
        let mut seen = vec![false; p];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..p {
                let w = if forward { matrix.get(v, u) } else { matrix.get(u, v) };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Rate of approach to equilibrium.
///
/// Two states: the signed second eigenvalue `trace − 1`. Larger chains: the
/// modulus of the subdominant eigenvalue, from two-vector subspace iteration
/// on the deflated operator `M − π 1ᵀ` (the unit eigenvalue removed). Two
/// vectors are carried so a complex-conjugate pair is resolved exactly.
pub fn decay_rate(matrix: &TransitionMatrix) -> Result<f64, AnalyticError> {
    if matrix.dim() == 2 {
        return Ok(matrix.trace() - 1.0);
    }
    let pi = equilibrium(matrix)?.distribution.counts().to_vec();
    let p = matrix.dim();
    let apply = |v: &[f64]| {
        let mut w = matrix.apply_slice(v);
        deflate(&mut w, &pi);
        w
    };
    // Deterministic, generic start vectors.
    let mut q1: Vec<f64> = (0..p).map(|i| 1.0 + ((i * 7 + 3) % 11) as f64 * 0.37).collect();
    let mut q2: Vec<f64> = (0..p).map(|i| ((i * 5 + 2) % 13) as f64 * 0.21 - 1.0).collect();
    deflate(&mut q1, &pi);
    deflate(&mut q2, &pi);
    if !orthonormalize(&mut q1, &mut q2) {
        return Ok(0.0);
    }

    let mut prev = f64::NAN;
    let mut stable = 0;
    for _ in 0..100_000 {
        let z1 = apply(&q1);
        let z2 = apply(&q2);
        // Rayleigh quotient H = Qᵀ M' Q on the current basis.
        let h = [[dot(&q1, &z1), dot(&q1, &z2)], [dot(&q2, &z1), dot(&q2, &z2)]];
        let est = max_eigen_modulus_2x2(h);
        if (est - prev).abs() <= 1e-15 * est.max(1e-300) {
            stable += 1;
            if stable >= 8 {
                return Ok(est);
            }
        } else {
            stable = 0;
        }
        prev = est;
        q1 = z1;
        q2 = z2;
        if !orthonormalize(&mut q1, &mut q2) {
            // The deflated operator annihilated the basis: every other
            // eigenvalue is (numerically) zero, or only one survives.
            return Ok(if q1.iter().all(|x| *x == 0.0) { 0.0 } else { prev });
        }
    }
    Ok(prev)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram–Schmidt on two vectors; false if the pair is rank deficient.
fn orthonormalize(a: &mut [f64], b: &mut [f64]) -> bool {
    let na = dot(a, a).sqrt();
    if na < 1e-200 {
        a.iter_mut().for_each(|x| *x = 0.0);
        return false;
    }
    a.iter_mut().for_each(|x| *x /= na);
    let proj = dot(a, b);
    b.iter_mut().zip(a.iter()).for_each(|(y, x)| *y -= proj * x);
    let nb = dot(b, b).sqrt();
    if nb < 1e-200 * na.max(1.0) {
        return false;
    }
    b.iter_mut().for_each(|y| *y /= nb);
    true
}

fn max_eigen_modulus_2x2(h: [[f64; 2]; 2]) -> f64 {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
    } else {
        det.abs().sqrt()
    }
}

/// Remove the π component so the iterate keeps zero total mass.
fn deflate(v: &mut [f64], pi: &[f64]) {
    let s: f64 = v.iter().sum();
    for (x, w) in v.iter_mut().zip(pi) {
        *x -= s * w;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicPattern {
    pub period: usize,
    /// Focus share just after an intervention.
    pub upper: f64,
    /// Focus share just before the next intervention.
    pub lower: f64,
    pub rest_equilibrium: f64,
    pub decay: f64,
}

impl PeriodicPattern {
    pub fn high(&self) -> f64 {
        self.upper.max(self.lower)
    }

    pub fn low(&self) -> f64 {
        self.upper.min(self.lower)
    }
}

/// Converged post- and pre-intervention shares when `intervention` is applied
/// every `period` steps and `rest` otherwise.
///
/// These are the cycle endpoints. They are also the cycle's extremes unless
/// `rest` has a negative second eigenvalue, in which case the share
/// overshoots between interventions.
pub fn periodic_peaks(
    rest: &TransitionMatrix,
    intervention: &TransitionMatrix,
    period: usize,
) -> Result<PeriodicPattern, AnalyticError> {
    if period == 0 {
        return Err(AnalyticError::ZeroPeriod);
    }
    if rest.space() != intervention.space() {
        return Err(AnalyticError::SpaceMismatch);
    }
    let (qi, ri) = intervention
        .two_state_rates()
        .ok_or(AnalyticError::NotTwoState(intervention.dim()))?;
    if rest.dim() != 2 {
        return Err(AnalyticError::NotTwoState(rest.dim()));
    }
    let e = equilibrium(rest)?.engaged_ratio;
    let lambda = decay_rate(rest)?;
    let gain = 1.0 - qi - ri;
    let c = lambda.powi(period as i32 - 1);
    let det = 1.0 - c * gain;
    if det.abs() < 1e-15 {
        return Err(AnalyticError::Singular);
    }
    let lower = (e * (1.0 - c) + c * qi) / det;
    let upper = qi + gain * lower;
    Ok(PeriodicPattern {
        period,
        upper,
        lower,
        rest_equilibrium: e,
        decay: lambda,
    })
}
