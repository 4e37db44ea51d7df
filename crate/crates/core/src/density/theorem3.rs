//! Common variance `sigma^2` for every real and imaginary part.

use super::DensityError;
use crate::model::{BasisFamily, ComplexLevel};
use crate::numeric::{CompensatedComplexSum, CompensatedSum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `B0 = sum |f_j|^2`, `B1 = sum conj(f_j) f_j'`, `B2 = sum |f_j'|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualVarianceParts {
    pub b0: f64,
    pub b1: Complex64,
    pub b2: f64,
    pub sigma2: f64,
    pub h: f64,
}

pub fn theorem3_density(
    sigma2: f64,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    z: Complex64,
) -> Result<EqualVarianceParts, DensityError> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(DensityError::InvalidVariance(sigma2));
    }
    let mut b0 = CompensatedSum::new();
    let mut b1 = CompensatedComplexSum::new();
    let mut b2 = CompensatedSum::new();
    for f in basis.eval_all(z) {
        b0.add(f.value.norm_sqr());
        b1.add(f.value.conj() * f.deriv);
        b2.add(f.deriv.norm_sqr());
    }
    let (b0, b1, b2) = (b0.value(), b1.value(), b2.value());
    if !(b0 > 0.0) {
        return Err(DensityError::DegeneratePoint { z });
    }
    let k_sq = level.as_complex().norm_sqr();
    let ratio = b1.norm() / b0;
    let h = (-k_sq / (2.0 * sigma2 * b0)).exp() / (PI * b0)
        * (b2 - ratio * ratio * (b0 - k_sq / (2.0 * sigma2)));
    Ok(EqualVarianceParts {
        b0,
        b1,
        b2,
        sigma2,
        h,
    })
}
