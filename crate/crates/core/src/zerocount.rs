//! Monte Carlo zero counting for sampled coefficient vectors.
//!
//! Two independent counters: the argument principle along the region
//! boundary (any basis) and eigenvalues of the companion matrix (bases that
//! span polynomials). Draws whose zeros sit on the boundary are discarded
//! and reported.

use crate::model::{BasisFamily, CoefficientProfile, ComplexLevel, ModelError, Rectangle};
use crate::rng::{normal, StreamKey};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

/// Initial segments per rectangle edge for the winding counter.
pub const SEGMENTS_PER_EDGE: usize = 64;
/// A draw is a boundary hit when `min |w| < BOUNDARY_REL_TOL * max |w|` on
/// the boundary, or a companion eigenvalue lies this close to it.
pub const BOUNDARY_REL_TOL: f64 = 1e-9;
const MAX_BISECTIONS: u32 = 48;
/// Smallest accepted trial count.
pub const MIN_TRIALS: usize = 100;
/// Discard fraction at which an estimate is aborted.
pub const MAX_DISCARD_FRACTION: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroCountError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("a zero lies on or next to the region boundary")]
    BoundaryHit,
    #[error("leading polynomial coefficient is zero")]
    LeadingCoefficientZero,
    #[error("boundary winding {0} is not close to an integer")]
    NonIntegerWinding(f64),
    #[error("argument tracking did not resolve near z = {0}")]
    Unresolved(Complex64),
    #[error("companion eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("{got} coefficients for a basis of {expected} functions")]
    LengthMismatch { got: usize, expected: usize },
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(usize),
    #[error("{discarded} of {trials} trials hit the region boundary; move the boundary away from high zero density")]
    TooManyDiscarded { discarded: usize, trials: usize },
}

struct BoundaryWalk<'a, F> {
    w: &'a F,
    total: f64,
    min_abs: f64,
    max_abs: f64,
}

impl<F: Fn(Complex64) -> Complex64> BoundaryWalk<'_, F> {
    fn observe(&mut self, v: Complex64) {
        let r = v.norm();
        self.min_abs = self.min_abs.min(r);
        self.max_abs = self.max_abs.max(r);
    }

    fn segment(&mut self, a: Complex64, wa: Complex64, b: Complex64, wb: Complex64, depth: u32) -> Result<(), ZeroCountError> {
        if wa == Complex64::new(0.0, 0.0) || wb == Complex64::new(0.0, 0.0) {
            return Err(ZeroCountError::BoundaryHit);
        }
        let delta = (wb / wa).arg();
        if delta.abs() < FRAC_PI_2 {
            self.total += delta;
            return Ok(());
        }
        if depth == MAX_BISECTIONS {
            return Err(ZeroCountError::Unresolved(a));
        }
        let m = (a + b) / 2.0;
        let wm = (self.w)(m);
        self.observe(wm);
        self.segment(a, wa, m, wm, depth + 1)?;
        self.segment(m, wm, b, wb, depth + 1)
    }
}

/// Winding number of `w(z) = sum_j coeffs[j] f_j(z) - K` around the
/// counterclockwise boundary of `region`.
pub fn count_zeros_winding(
    coeffs: &[Complex64],
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    region: &Rectangle,
) -> Result<usize, ZeroCountError> {
    if coeffs.len() != basis.len() {
        return Err(ZeroCountError::LengthMismatch { got: coeffs.len(), expected: basis.len() });
    }
    let k = level.as_complex();
    let w = |z: Complex64| basis.combine(coeffs, z) - k;
    let mut walk = BoundaryWalk { w: &w, total: 0.0, min_abs: f64::INFINITY, max_abs: 0.0 };

    let corners = region.corners();
    let mut points = Vec::with_capacity(4 * SEGMENTS_PER_EDGE + 1);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for s in 0..SEGMENTS_PER_EDGE {
            points.push(a + (b - a) * (s as f64 / SEGMENTS_PER_EDGE as f64));
        }
    }
    points.push(corners[0]);
    let values: Vec<Complex64> = points.iter().map(|&z| w(z)).collect();
    for &v in &values {
        walk.observe(v);
    }
    for i in 0..points.len() - 1 {
        walk.segment(points[i], values[i], points[i + 1], values[i + 1], 0)?;
    }
    if walk.min_abs < BOUNDARY_REL_TOL * walk.max_abs {
        return Err(ZeroCountError::BoundaryHit);
    }
    let turns = walk.total / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 || rounded < 0.0 {
        return Err(ZeroCountError::NonIntegerWinding(turns));
    }
    Ok(rounded as usize)
}

/// Roots of `sum_j coeffs[j] z^j` (lowest degree first) as eigenvalues of
/// the companion matrix.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, ZeroCountError> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    if lead == Complex64::new(0.0, 0.0) {
        return Err(ZeroCountError::LeadingCoefficientZero);
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or(ZeroCountError::EigenFailure)?;
    let eig = schur.eigenvalues().ok_or(ZeroCountError::EigenFailure)?;
    Ok(eig.iter().copied().collect())
}

/// Number of roots of `sum_j coeffs[j] z^j - K` strictly inside `region`.
pub fn count_zeros_companion(
    coeffs: &[Complex64],
    level: ComplexLevel,
    region: &Rectangle,
) -> Result<usize, ZeroCountError> {
    let mut shifted = coeffs.to_vec();
    if let Some(c0) = shifted.first_mut() {
        *c0 -= level.as_complex();
    }
    let mut count = 0;
    for r in polynomial_roots(&shifted)? {
        if region.boundary_distance(r).abs() < BOUNDARY_REL_TOL {
            return Err(ZeroCountError::BoundaryHit);
        }
        if region.contains_strictly(r) {
            count += 1;
        }
    }
    Ok(count)
}

/// Coefficients `eta_j = a_j + i b_j` of one trial. `a_j` uses slot `2j`,
/// `b_j` slot `2j + 1`.
pub fn draw_coefficients(profile: &CoefficientProfile, seed: u64, trial: u64) -> Vec<Complex64> {
    profile
        .laws()
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let j = j as u64;
            let a = normal(StreamKey::new(seed, trial, 2 * j), l.mu_a, l.var_a.sqrt());
            let b = normal(StreamKey::new(seed, trial, 2 * j + 1), l.mu_b, l.var_b.sqrt());
            Complex64::new(a, b)
        })
        .collect()
}

/// Zero count of one draw, by companion matrix when the basis spans
/// polynomials and by winding otherwise.
pub fn count_zeros(
    coeffs: &[Complex64],
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    region: &Rectangle,
) -> Result<usize, ZeroCountError> {
    match basis.polynomial_coefficients(coeffs) {
        Some(poly) => count_zeros_companion(&poly, level, region),
        None => count_zeros_winding(coeffs, basis, level, region),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub discarded_trials: usize,
}

/// Monte Carlo estimate of the expected number of zeros of `S_N - K` in
/// `region`, with a 95% normal confidence interval.
pub fn estimate_expected_count(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    region: &Rectangle,
    trials: usize,
    seed: u64,
) -> Result<MCEstimate, ZeroCountError> {
    if trials < MIN_TRIALS {
        return Err(ZeroCountError::TooFewTrials(trials));
    }
    if profile.len() != basis.len() {
        return Err(ZeroCountError::LengthMismatch { got: profile.len(), expected: basis.len() });
    }
    let outcomes: Vec<Result<usize, ZeroCountError>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| count_zeros(&draw_coefficients(profile, seed, t), basis, level, region))
        .collect();

    let mut counts = Vec::with_capacity(trials);
    let mut discarded = 0;
    for o in outcomes {
        match o {
            Ok(c) => counts.push(c as f64),
            Err(ZeroCountError::BoundaryHit) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    if discarded as f64 >= MAX_DISCARD_FRACTION * trials as f64 {
        return Err(ZeroCountError::TooManyDiscarded { discarded, trials });
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_error = (var / n).sqrt();
    Ok(MCEstimate {
        trials,
        mean,
        std_error,
        ci_low: mean - 1.96 * std_error,
        ci_high: mean + 1.96 * std_error,
        discarded_trials: discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientLaw, MonomialBasis};

    fn z_squared() -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    }

    fn one() -> ComplexLevel {
        ComplexLevel::new(1.0, 0.0).unwrap()
    }

    #[test]
    fn winding_counts_explicit_roots() {
        let b = MonomialBasis::new(2);
        let big = Rectangle::centered_square(2.0).unwrap();
        let right = Rectangle::new(0.5, 2.0, -0.5, 0.5).unwrap();
        assert_eq!(count_zeros_winding(&z_squared(), &b, one(), &big), Ok(2));
        assert_eq!(count_zeros_winding(&z_squared(), &b, one(), &right), Ok(1));
    }

    #[test]
    fn companion_counts_explicit_roots() {
        let big = Rectangle::centered_square(2.0).unwrap();
        let far = Rectangle::new(3.0, 4.0, -1.0, 1.0).unwrap();
        assert_eq!(count_zeros_companion(&z_squared(), one(), &big), Ok(2));
        assert_eq!(count_zeros_companion(&z_squared(), one(), &far), Ok(0));
    }

    #[test]
    fn root_on_boundary_is_flagged() {
        let b = MonomialBasis::new(2);
        let r = Rectangle::new(1.0, 2.0, -1.0, 1.0).unwrap();
        assert_eq!(count_zeros_winding(&z_squared(), &b, one(), &r), Err(ZeroCountError::BoundaryHit));
        assert_eq!(count_zeros_companion(&z_squared(), one(), &r), Err(ZeroCountError::BoundaryHit));
    }

    #[test]
    fn zero_leading_coefficient_is_rejected() {
        let c = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let r = Rectangle::centered_square(1.0).unwrap();
        assert_eq!(count_zeros_companion(&c, ComplexLevel::zero(), &r), Err(ZeroCountError::LeadingCoefficientZero));
    }

    #[test]
    fn estimate_is_deterministic_and_requires_trials() {
        let profile = CoefficientProfile::iid(3, CoefficientLaw::centered(1.0, 1.0)).unwrap();
        let b = MonomialBasis::new(2);
        let r = Rectangle::centered_square(1.0).unwrap();
        let a = estimate_expected_count(&profile, &b, ComplexLevel::zero(), &r, 500, 9).unwrap();
        let c = estimate_expected_count(&profile, &b, ComplexLevel::zero(), &r, 500, 9).unwrap();
        assert_eq!(a, c);
        assert!(a.ci_low <= a.mean && a.mean <= a.ci_high);
        assert_eq!(
            estimate_expected_count(&profile, &b, ComplexLevel::zero(), &r, 99, 9),
            Err(ZeroCountError::TooFewTrials(99))
        );
    }
}
