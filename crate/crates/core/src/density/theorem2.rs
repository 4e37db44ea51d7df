//! Zero-mean coefficients with arbitrary per-index variances.

use super::{check_lengths, DensityError, DEGENERACY_THRESHOLD};
use crate::model::{BasisFamily, BasisValue, CoefficientProfile, ComplexLevel};
use crate::numeric::{diff_of_products, CompensatedComplexSum, CompensatedSum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Intermediate quantities of a zero-mean density evaluation.
///
/// `y1, y2, y3` are `Var(Re S)`, `Cov(Re S, Im S)` and `Var(Im S)`;
/// `d1` and `i d2` are the covariances of `S'` with `Re S` and `Im S`
/// written as complex numbers; `d3 = E|S'|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParts {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub d0: f64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: f64,
    pub h: f64,
}

/// Sums over the basis for the zero-mean forms, before assembly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ZeroMeanSums {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: f64,
}

impl ZeroMeanSums {
    /// Accumulates over `(var_a, var_b, f_j, f_j')` tuples.
    pub fn accumulate<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64, BasisValue)>,
    {
        let mut y1 = CompensatedSum::new();
        let mut y2 = CompensatedSum::new();
        let mut y3 = CompensatedSum::new();
        let mut d1 = CompensatedComplexSum::new();
        let mut d2 = CompensatedComplexSum::new();
        let mut d3 = CompensatedSum::new();
        for (sa, sb, f) in terms {
            let (u, v) = (f.value.re, f.value.im);
            y1.add(sa * u * u + sb * v * v);
            y2.add((sa - sb) * u * v);
            y3.add(sb * u * u + sa * v * v);
            d1.add(Complex64::new(sa * u, -sb * v) * f.deriv);
            d2.add(Complex64::new(sb * u, -sa * v) * f.deriv);
            d3.add((sa + sb) * f.deriv.norm_sqr());
        }
        Self {
            y1: y1.value(),
            y2: y2.value(),
            y3: y3.value(),
            d1: d1.value(),
            d2: d2.value(),
            d3: d3.value(),
        }
    }

    pub fn from_basis(profile: &CoefficientProfile, basis: &dyn BasisFamily, z: Complex64) -> Self {
        let values = basis.eval_all(z);
        Self::accumulate(
            profile
                .laws()
                .iter()
                .zip(values)
                .map(|(l, f)| (l.var_a, l.var_b, f)),
        )
    }

    /// `D0 = sqrt(Y1 Y3 - Y2^2)` after the degeneracy checks.
    pub fn d0(&self, z: Complex64) -> Result<f64, DensityError> {
        if !(self.y1 > 0.0 && self.y3 > 0.0) {
            return Err(DensityError::DegeneratePoint { z });
        }
        let scale = self.y1 * self.y3;
        let det = diff_of_products(self.y1, self.y3, self.y2, self.y2);
        if !(det > DEGENERACY_THRESHOLD * scale) {
            return Err(DensityError::DegenerateCovariance { z, det, scale });
        }
        Ok(det.sqrt())
    }

    /// Assembles `h` from the closed form for zero-mean coefficients.
    pub fn assemble(&self, level: ComplexLevel, z: Complex64) -> Result<DensityParts, DensityError> {
        let d0 = self.d0(z)?;
        let ZeroMeanSums {
            y1,
            y2,
            y3,
            d1,
            d2,
            d3,
        } = *self;
        let (k1, k2) = (level.k1, level.k2);
        let d0_2 = d0 * d0;
        let d0_3 = d0_2 * d0;

        let quad = k1 * k1 * y3 + k2 * k2 * y1 - 2.0 * k1 * k2 * y2;
        let prefactor = (-quad / (2.0 * d0_2)).exp() / (2.0 * PI * d0);

        let shift1 = k1 * y3 - k2 * y2;
        let shift2 = k1 * y2 - k2 * y1;
        let mixed = k1 * (y2 + y3) - k2 * (y1 + y2);
        let d12 = d1 + Complex64::i() * d2;

        let braces = d3 - d1.norm_sqr() / d0 * ((y2 + y3) / d0 - shift1 * mixed / d0_3)
            - d2.norm_sqr() / d0 * ((y1 + y2) / d0 - shift2 * mixed / d0_3)
            + d12.norm_sqr() / d0 * (y2 / d0 - shift1 * shift2 / d0_3);

        Ok(DensityParts {
            y1,
            y2,
            y3,
            d0,
            d1,
            d2,
            d3,
            h: prefactor * braces,
        })
    }
}

/// Expected density of zeros of `S_N(z) - K` for zero-mean coefficients with
/// arbitrary variances `var_a`, `var_b` per index.
pub fn theorem2_density(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    z: Complex64,
) -> Result<DensityParts, DensityError> {
    check_lengths(profile, basis)?;
    if !profile.is_zero_mean() {
        return Err(DensityError::NonZeroMeans);
    }
    ZeroMeanSums::from_basis(profile, basis, z).assemble(level, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientLaw, MonomialBasis};
    use std::f64::consts::FRAC_1_PI;

    fn unit(n: usize) -> CoefficientProfile {
        CoefficientProfile::iid(n + 1, CoefficientLaw::centered(1.0, 1.0)).unwrap()
    }

    #[test]
    fn kac_at_origin_is_one_over_pi() {
        let p = theorem2_density(&unit(2), &MonomialBasis::new(2), ComplexLevel::zero(), Complex64::new(0.0, 0.0)).unwrap();
        assert!((p.h - FRAC_1_PI).abs() <= 1e-15);
        assert_eq!((p.y1, p.y2, p.y3), (1.0, 0.0, 1.0));
    }

    #[test]
    fn kac_at_origin_with_level() {
        let level = ComplexLevel::new(0.8, -0.6).unwrap();
        let p = theorem2_density(&unit(2), &MonomialBasis::new(2), level, Complex64::new(0.0, 0.0)).unwrap();
        let expected = (-0.5f64).exp() / PI;
        assert!((p.h - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn d0_squared_matches_determinant() {
        let profile = CoefficientProfile::centered(&[1.0, 2.0, 3.0], &[2.0, 1.0, 2.0]).unwrap();
        let p = theorem2_density(&profile, &MonomialBasis::new(2), ComplexLevel::zero(), Complex64::new(0.3, 0.4)).unwrap();
        let det = p.y1 * p.y3 - p.y2 * p.y2;
        assert!((p.d0 * p.d0 - det).abs() <= 1e-12 * det);
        assert!(p.d0 > 0.0 && p.y1 > 0.0 && p.y3 > 0.0);
    }

    #[test]
    fn rejects_nonzero_means() {
        let law = CoefficientLaw { mu_a: 0.1, var_a: 1.0, mu_b: 0.0, var_b: 1.0 };
        let profile = CoefficientProfile::iid(3, law).unwrap();
        assert_eq!(
            theorem2_density(&profile, &MonomialBasis::new(2), ComplexLevel::zero(), Complex64::new(0.1, 0.1)),
            Err(DensityError::NonZeroMeans)
        );
    }

    #[test]
    fn rejects_length_mismatch() {
        assert!(matches!(
            theorem2_density(&unit(3), &MonomialBasis::new(2), ComplexLevel::zero(), Complex64::new(0.0, 0.0)),
            Err(DensityError::LengthMismatch { basis: 3, profile: 4 })
        ));
    }

    #[test]
    fn degenerate_point_when_all_functions_vanish() {
        // f_0 = 0, f_1 = z, f_2 = z^2: all vanish at the origin
        let basis = crate::model::WeightedMonomialBasis::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            theorem2_density(&unit(2), &basis, ComplexLevel::zero(), Complex64::new(0.0, 0.0)),
            Err(DensityError::DegeneratePoint { .. })
        ));
    }

    #[test]
    fn degenerate_covariance_when_parts_are_collinear() {
        // a single live basis function and var_b << var_a: Re S and Im S are
        // almost perfectly correlated
        let basis = crate::model::WeightedMonomialBasis::new(vec![0.0, 1.0]).unwrap();
        let profile = CoefficientProfile::centered(&[1.0, 1.0], &[1e-20, 1e-20]).unwrap();
        assert!(matches!(
            theorem2_density(&profile, &basis, ComplexLevel::zero(), Complex64::new(0.5, 0.5)),
            Err(DensityError::DegenerateCovariance { .. })
        ));
    }
}
