//! Coefficients with nonzero means.
//!
//! The means shift `E(Re S)`, `E(Im S)` and `E(S') = M` but leave every
//! covariance unchanged, so the starred variances equal the zero-mean ones
//! and the per-index covariance weights carry no mean correction. The
//! conditional mean of `S'` given `S = K` is
//! `M + (D1* I4 + i D2* I5) / D0*^2`, whose squared modulus supplies the
//! `|M|^2` term and the two `M` cross terms below.
//!
//! [`Theorem4Reading::AsPrinted`] keeps the published variant (starred
//! variances reduced by the squared means, mean-corrected weights, opposite
//! sign on the cross terms, no `|M|^2`). It coincides with the corrected
//! form when all means vanish and is kept for comparison only.

use super::{check_lengths, DensityError, DEGENERACY_THRESHOLD};
use crate::model::{BasisFamily, CoefficientProfile, ComplexLevel};
use crate::numeric::{diff_of_products, CompensatedComplexSum, CompensatedSum};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Theorem4Reading {
    /// Exact Gaussian conditioning; agrees with Monte Carlo.
    #[default]
    Corrected,
    /// The published display, term for term.
    AsPrinted,
}

/// Intermediate quantities of a general-mean density evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPartsGeneral {
    pub y1s: f64,
    pub y2s: f64,
    pub y3s: f64,
    pub d0s: f64,
    pub d1s: Complex64,
    pub d2s: Complex64,
    pub d3s: f64,
    /// `M = sum_j E(eta_j) f_j'`.
    pub m: Complex64,
    /// `E(Re S)`.
    pub ex1: f64,
    /// `E(Im S)`.
    pub ex2: f64,
    pub h: f64,
}

/// Expected zero density of `S_N(z) - K` for arbitrary coefficient means.
pub fn theorem4_density(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    z: Complex64,
) -> Result<DensityPartsGeneral, DensityError> {
    theorem4_density_with(Theorem4Reading::Corrected, profile, basis, level, z)
}

pub fn theorem4_density_with(
    reading: Theorem4Reading,
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    z: Complex64,
) -> Result<DensityPartsGeneral, DensityError> {
    check_lengths(profile, basis)?;
    let values = basis.eval_all(z);
    let laws = profile.laws();

    // first pass: means of Re S, Im S and S'
    let mut ex1 = CompensatedSum::new();
    let mut ex2 = CompensatedSum::new();
    let mut m = CompensatedComplexSum::new();
    for (l, f) in laws.iter().zip(&values) {
        let (u, v) = (f.value.re, f.value.im);
        ex1.add(l.mu_a * u - l.mu_b * v);
        ex2.add(l.mu_a * v + l.mu_b * u);
        m.add(l.mean() * f.deriv);
    }
    let (ex1, ex2, m) = (ex1.value(), ex2.value(), m.value());

    // second pass: covariances
    let mut y1 = CompensatedSum::new();
    let mut y2 = CompensatedSum::new();
    let mut y3 = CompensatedSum::new();
    let mut d1 = CompensatedComplexSum::new();
    let mut d2 = CompensatedComplexSum::new();
    let mut d3 = CompensatedSum::new();
    for (l, f) in laws.iter().zip(&values) {
        let (u, v) = (f.value.re, f.value.im);
        let (sa, sb) = (l.var_a, l.var_b);
        y1.add(sa * u * u + sb * v * v);
        y2.add((sa - sb) * u * v);
        y3.add(sb * u * u + sa * v * v);
        let (a1, b1, a2, b2) = match reading {
            Theorem4Reading::Corrected => (sa * u, sb * v, sa * v, sb * u),
            Theorem4Reading::AsPrinted => (
                sa * u - l.mu_a * ex1,
                sb * v + l.mu_b * ex1,
                sa * v - l.mu_a * ex2,
                sb * u - l.mu_b * ex2,
            ),
        };
        d1.add(Complex64::new(a1, -b1) * f.deriv);
        d2.add(Complex64::new(b2, -a2) * f.deriv);
        d3.add((sa + sb) * f.deriv.norm_sqr());
    }
    let (mut y1s, mut y2s, mut y3s) = (y1.value(), y2.value(), y3.value());
    if reading == Theorem4Reading::AsPrinted {
        y1s -= ex1 * ex1;
        y2s -= ex1 * ex2;
        y3s -= ex2 * ex2;
    }
    let (d1s, d2s, d3s) = (d1.value(), d2.value(), d3.value());

    if !(y1s > 0.0 && y3s > 0.0) {
        return Err(if values.iter().all(|f| f.value == Complex64::new(0.0, 0.0)) {
            DensityError::DegeneratePoint { z }
        } else {
            DensityError::DegenerateCovariance {
                z,
                det: y1s * y3s - y2s * y2s,
                scale: (y1s * y3s).abs(),
            }
        });
    }
    let scale = y1s * y3s;
    let det = diff_of_products(y1s, y3s, y2s, y2s);
    if !(det > DEGENERACY_THRESHOLD * scale) {
        return Err(DensityError::DegenerateCovariance { z, det, scale });
    }
    let d0s = det.sqrt();

    let kc1 = level.k1 - ex1;
    let kc2 = level.k2 - ex2;
    // components of Sigma^{-1} (K - E X), scaled by det
    let i4 = kc1 * y3s - kc2 * y2s;
    let i5 = kc2 * y1s - kc1 * y2s;

    let quad = kc1 * kc1 * y3s + kc2 * kc2 * y1s - 2.0 * kc1 * kc2 * y2s;
    let prefactor = (-quad / (2.0 * det)).exp() / (2.0 * PI * d0s);

    let i_d2 = Complex64::i() * d2s;
    // |D1 + i D2|^2 - |D1|^2 - |D2|^2 and the M analogues, in product form
    let cross_d = 2.0 * (d1s * i_d2.conj()).re;
    let cross_m1 = 2.0 * (m * d1s.conj()).re;
    let cross_m2 = 2.0 * (m * i_d2.conj()).re;

    let mut braces = d3s
        - d1s.norm_sqr() / det * (y3s - i4 * i4 / det)
        - d2s.norm_sqr() / det * (y1s - i5 * i5 / det)
        + cross_d / det * (y2s + i4 * i5 / det);
    match reading {
        Theorem4Reading::Corrected => {
            braces += m.norm_sqr() + cross_m1 / det * i4 + cross_m2 / det * i5;
        }
        Theorem4Reading::AsPrinted => {
            braces += -cross_m1 / det * i4 - cross_m2 / det * i5;
        }
    }

    Ok(DensityPartsGeneral {
        y1s,
        y2s,
        y3s,
        d0s,
        d1s,
        d2s,
        d3s,
        m,
        ex1,
        ex2,
        h: prefactor * braces,
    })
}
