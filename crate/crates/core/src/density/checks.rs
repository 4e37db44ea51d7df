//! Randomized agreement checks between the closed forms and the oracle.

use super::{
    corollary1_density, corollary2_density, moments_path_density, theorem2_density,
    theorem3_density, theorem4_density, theorem5_density, theorem5_direct, DensityError,
};
use crate::model::{BasisFamily, CoefficientLaw, CoefficientProfile, ComplexLevel, MonomialBasis, TimeGrid};
use crate::numeric::relative_deviation;
use crate::rng::{uniform_in, StreamKey};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

/// One random test case: monomial basis, zero means.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomConfig {
    pub degree: usize,
    pub var_a: Vec<f64>,
    pub var_b: Vec<f64>,
    pub z: Complex64,
    pub level: ComplexLevel,
}

impl RandomConfig {
    /// Draws `N` in `2..=8`, variances in `[0.25, 4]`, `|z| <= 2`, `|K| <= 2`.
    pub fn draw(seed: u64, index: u64) -> Self {
        let mut slot = 0;
        let mut next = |lo: f64, hi: f64| {
            slot += 1;
            uniform_in(StreamKey::new(seed, index, slot), lo, hi)
        };
        let degree = (next(2.0, 9.0).floor() as usize).min(8);
        let var_a = (0..=degree).map(|_| next(0.25, 4.0)).collect();
        let var_b = (0..=degree).map(|_| next(0.25, 4.0)).collect();
        let z = Complex64::from_polar(2.0 * next(0.0, 1.0).sqrt(), next(0.0, TAU));
        let k = Complex64::from_polar(2.0 * next(0.0, 1.0).sqrt(), next(0.0, TAU));
        Self {
            degree,
            var_a,
            var_b,
            z,
            level: ComplexLevel { k1: k.re, k2: k.im },
        }
    }

    pub fn profile(&self) -> CoefficientProfile {
        CoefficientProfile::centered(&self.var_a, &self.var_b).expect("variances are positive")
    }

    pub fn basis(&self) -> MonomialBasis {
        MonomialBasis::new(self.degree)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCheck {
    pub name: &'static str,
    pub samples: usize,
    pub max_rel_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub seed: u64,
    pub configs: usize,
    pub checks: Vec<ReductionCheck>,
}

impl ReductionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn run_check<F>(name: &'static str, tolerance: f64, seed: u64, n: usize, pair: F) -> ReductionCheck
where
    F: Fn(&RandomConfig) -> Result<(f64, f64), DensityError>,
{
    let mut worst = 0.0f64;
    let mut samples = 0;
    for i in 0..n {
        let cfg = RandomConfig::draw(seed, i as u64);
        match pair(&cfg) {
            Ok((a, b)) => {
                worst = worst.max(relative_deviation(a, b));
                samples += 1;
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    ReductionCheck {
        name,
        samples,
        max_rel_dev: worst,
        tolerance,
        pass: worst <= tolerance,
    }
}

/// Runs every reduction identity over `n` random configurations.
pub fn reduction_report(seed: u64, n: usize) -> ReductionReport {
    let checks = vec![
        run_check("theorem4 zero-mean vs theorem2", 1e-12, seed, n, |c| {
            let (p, b) = (c.profile(), c.basis());
            Ok((
                theorem4_density(&p, &b, c.level, c.z)?.h,
                theorem2_density(&p, &b, c.level, c.z)?.h,
            ))
        }),
        run_check("theorem2 equal-variance vs theorem3", 1e-12, seed, n, |c| {
            let sigma2 = c.var_a[0];
            let p = CoefficientProfile::iid(c.degree + 1, CoefficientLaw::centered(sigma2, sigma2))?;
            let b = c.basis();
            Ok((
                theorem2_density(&p, &b, c.level, c.z)?.h,
                theorem3_density(sigma2, &b, c.level, c.z)?.h,
            ))
        }),
        run_check("corollary2 vs theorem2 at K = 0", 1e-12, seed, n, |c| {
            let (p, b) = (c.profile(), c.basis());
            Ok((
                corollary2_density(&p, &b, c.z)?,
                theorem2_density(&p, &b, ComplexLevel::zero(), c.z)?.h,
            ))
        }),
        run_check("corollary1 vs theorem2 at K = r + ir", 1e-12, seed, n, |c| {
            let (p, b) = (c.profile(), c.basis());
            let r = c.level.as_complex().norm().max(1e-3);
            Ok((
                corollary1_density(&p, &b, r, c.z)?,
                theorem2_density(&p, &b, ComplexLevel { k1: r, k2: r }, c.z)?.h,
            ))
        }),
        run_check("moments path vs theorem2", 1e-9, seed, n, |c| {
            let (p, b) = (c.profile(), c.basis());
            Ok((
                moments_path_density(&p, &b, c.level, c.z)?,
                theorem2_density(&p, &b, c.level, c.z)?.h,
            ))
        }),
        run_check("theorem5 direct vs composed", 1e-12, seed, n, |c| {
            let mut t = 0.0;
            let times: Vec<f64> = c.var_a.iter().map(|v| {
                t += v;
                t
            })
            .collect();
            let grid = TimeGrid::new(times)?;
            let inner: Arc<dyn BasisFamily> = Arc::new(c.basis());
            Ok((
                theorem5_direct(inner.as_ref(), &grid, c.level, c.z)?.h,
                theorem5_density(inner, &grid, c.level, c.z)?.h,
            ))
        }),
    ];
    ReductionReport {
        seed,
        configs: n,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_in_range_and_reproducible() {
        for i in 0..200 {
            let c = RandomConfig::draw(3, i);
            assert!((2..=8).contains(&c.degree));
            assert!(c.var_a.iter().chain(&c.var_b).all(|v| (0.25..=4.0).contains(v)));
            assert!(c.z.norm() <= 2.0 && c.level.as_complex().norm() <= 2.0);
            assert_eq!(c, RandomConfig::draw(3, i));
        }
    }

    #[test]
    fn small_report_passes() {
        let r = reduction_report(11, 20);
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
    }
}
