//! Special levels of the zero-mean form.
//!
//! For `K1 = K2 = r` the zero-mean closed form specializes to
//!
//! ```text
//! h = exp(-r^2 (Y1 - 2 Y2 + Y3) / (2 D0^2)) / (2 pi D0)
//!     * { D3 - |D1|^2/D0 ((Y2+Y3)/D0 - r^2 (Y3-Y2)(Y3-Y1)/D0^3)
//!            - |D2|^2/D0 ((Y1+Y2)/D0 - r^2 (Y2-Y1)(Y3-Y1)/D0^3)
//!            + |D1+iD2|^2/D0 (Y2/D0 - r^2 (Y3-Y2)(Y2-Y1)/D0^3) }
//! ```
//!
//! and for `K = 0` to a rational expression without the exponential.

use super::theorem2::ZeroMeanSums;
use super::{check_lengths, DensityError};
use crate::model::{BasisFamily, CoefficientProfile};
use num_complex::Complex64;
use std::f64::consts::PI;

fn zero_mean_sums(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    z: Complex64,
) -> Result<ZeroMeanSums, DensityError> {
    check_lengths(profile, basis)?;
    if !profile.is_zero_mean() {
        return Err(DensityError::NonZeroMeans);
    }
    Ok(ZeroMeanSums::from_basis(profile, basis, z))
}

/// Density at the level `K = radius + i radius`.
pub fn corollary1_density(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    radius: f64,
    z: Complex64,
) -> Result<f64, DensityError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(DensityError::InvalidRadius(radius));
    }
    let s = zero_mean_sums(profile, basis, z)?;
    let d0 = s.d0(z)?;
    let ZeroMeanSums {
        y1,
        y2,
        y3,
        d1,
        d2,
        d3,
    } = s;
    let r2 = radius * radius;
    let d0_3 = d0 * d0 * d0;
    let d12 = d1 + Complex64::i() * d2;
    let braces = d3
        - d1.norm_sqr() / d0 * ((y2 + y3) / d0 - r2 * (y3 - y2) * (y3 - y1) / d0_3)
        - d2.norm_sqr() / d0 * ((y1 + y2) / d0 - r2 * (y2 - y1) * (y3 - y1) / d0_3)
        + d12.norm_sqr() / d0 * (y2 / d0 - r2 * (y3 - y2) * (y2 - y1) / d0_3);
    Ok((-r2 * (y1 - 2.0 * y2 + y3) / (2.0 * d0 * d0)).exp() / (2.0 * PI * d0) * braces)
}

/// Density at the level `K = 0`.
pub fn corollary2_density(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    z: Complex64,
) -> Result<f64, DensityError> {
    let s = zero_mean_sums(profile, basis, z)?;
    let d0 = s.d0(z)?;
    let d12 = s.d1 + Complex64::i() * s.d2;
    let numerator = d0 * d0 * s.d3
        - s.d1.norm_sqr() * (s.y2 + s.y3)
        - s.d2.norm_sqr() * (s.y1 + s.y2)
        + d12.norm_sqr() * s.y2;
    Ok(numerator / (2.0 * PI * d0 * d0 * d0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::theorem2_density;
    use crate::model::{CoefficientLaw, ComplexLevel, MonomialBasis};
    use std::f64::consts::FRAC_1_PI;

    #[test]
    fn kac_origin_zero_level() {
        let profile = CoefficientProfile::iid(3, CoefficientLaw::centered(1.0, 1.0)).unwrap();
        let h = corollary2_density(&profile, &MonomialBasis::new(2), Complex64::new(0.0, 0.0)).unwrap();
        assert!((h - FRAC_1_PI).abs() < 1e-16);
    }

    #[test]
    fn diagonal_level_matches_general_form() {
        let profile = CoefficientProfile::centered(&[1.0, 2.0, 3.0], &[2.0, 1.0, 2.0]).unwrap();
        let basis = MonomialBasis::new(2);
        let z = Complex64::new(0.3, 0.4);
        for r in [0.25, 1.0, 1.7] {
            let h = corollary1_density(&profile, &basis, r, z).unwrap();
            let level = ComplexLevel::new(r, r).unwrap();
            let g = theorem2_density(&profile, &basis, level, z).unwrap().h;
            assert!((h - g).abs() <= 1e-12 * g, "r = {r}: {h} vs {g}");
        }
    }

    #[test]
    fn radius_must_be_positive() {
        let profile = CoefficientProfile::iid(3, CoefficientLaw::centered(1.0, 1.0)).unwrap();
        assert_eq!(
            corollary1_density(&profile, &MonomialBasis::new(2), 0.0, Complex64::new(0.0, 0.0)),
            Err(DensityError::InvalidRadius(0.0))
        );
    }
}
