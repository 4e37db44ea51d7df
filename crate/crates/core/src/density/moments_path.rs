//! Independent reconstruction of the zero-mean density from conditional
//! Gaussian moments of the coefficients.
//!
//! Given `X = (Re S, Im S)`, every `a_j`, `b_j` is conditioned on `X = K`
//! separately, and `E(|S'|^2 | X = K)` is summed as a double sum over pairs
//! `(j, k)` of conditional second moments. Nothing here shares code with the
//! closed forms beyond basis evaluation.

use super::{check_lengths, DensityError, DEGENERACY_THRESHOLD};
use crate::model::{BasisFamily, CoefficientProfile, ComplexLevel};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Conditional law of the coefficients given `X = K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMoments {
    /// Covariance of `X`.
    pub sigma_xx: Matrix2<f64>,
    pub sigma_xx_inv: Matrix2<f64>,
    /// `E(a_j | X = K)`.
    pub mean_a: DVector<f64>,
    /// `E(b_j | X = K)`.
    pub mean_b: DVector<f64>,
    pub cov_aa: DMatrix<f64>,
    pub cov_ab: DMatrix<f64>,
    pub cov_bb: DMatrix<f64>,
    /// Joint density of `X` at `K`.
    pub density_x: f64,
}

/// Conditions every coefficient on `(Re S(z), Im S(z)) = (K1, K2)`.
pub fn conditional_moments(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    z: Complex64,
) -> Result<ConditionalMoments, DensityError> {
    check_lengths(profile, basis)?;
    if !profile.is_zero_mean() {
        return Err(DensityError::NonZeroMeans);
    }
    let values = basis.eval_all(z);
    let laws = profile.laws();
    let n = laws.len();

    // Cov(a_j, X) = var_a (u, v), Cov(b_j, X) = var_b (-v, u)
    let ca: Vec<Vector2<f64>> = laws
        .iter()
        .zip(&values)
        .map(|(l, f)| l.var_a * Vector2::new(f.value.re, f.value.im))
        .collect();
    let cb: Vec<Vector2<f64>> = laws
        .iter()
        .zip(&values)
        .map(|(l, f)| l.var_b * Vector2::new(-f.value.im, f.value.re))
        .collect();

    let mut sigma_xx = Matrix2::zeros();
    for (l, f) in laws.iter().zip(&values) {
        let ra = Vector2::new(f.value.re, f.value.im);
        let rb = Vector2::new(-f.value.im, f.value.re);
        sigma_xx += l.var_a * ra * ra.transpose() + l.var_b * rb * rb.transpose();
    }
    if !(sigma_xx[(0, 0)] > 0.0 && sigma_xx[(1, 1)] > 0.0) {
        return Err(DensityError::DegeneratePoint { z });
    }
    let scale = sigma_xx[(0, 0)] * sigma_xx[(1, 1)];
    let det = sigma_xx.determinant();
    if !(det > DEGENERACY_THRESHOLD * scale) {
        return Err(DensityError::DegenerateCovariance { z, det, scale });
    }
    let inv = Matrix2::new(
        sigma_xx[(1, 1)],
        -sigma_xx[(0, 1)],
        -sigma_xx[(1, 0)],
        sigma_xx[(0, 0)],
    ) / det;

    let k = Vector2::new(level.k1, level.k2);
    let w = inv * k;
    let mean_a = DVector::from_iterator(n, ca.iter().map(|c| c.dot(&w)));
    let mean_b = DVector::from_iterator(n, cb.iter().map(|c| c.dot(&w)));

    let mut cov_aa = DMatrix::zeros(n, n);
    let mut cov_ab = DMatrix::zeros(n, n);
    let mut cov_bb = DMatrix::zeros(n, n);
    for j in 0..n {
        for m in 0..n {
            cov_aa[(j, m)] = -ca[j].dot(&(inv * ca[m]));
            cov_ab[(j, m)] = -ca[j].dot(&(inv * cb[m]));
            cov_bb[(j, m)] = -cb[j].dot(&(inv * cb[m]));
        }
        cov_aa[(j, j)] += laws[j].var_a;
        cov_bb[(j, j)] += laws[j].var_b;
    }

    let density_x = (-0.5 * k.dot(&w)).exp() / (2.0 * PI * det.sqrt());
    Ok(ConditionalMoments {
        sigma_xx,
        sigma_xx_inv: inv,
        mean_a,
        mean_b,
        cov_aa,
        cov_ab,
        cov_bb,
        density_x,
    })
}

/// `E(|S'(z)|^2 | S(z) = K) p_X(K)` by direct double summation.
pub fn moments_path_density(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
    level: ComplexLevel,
    z: Complex64,
) -> Result<f64, DensityError> {
    let cm = conditional_moments(profile, basis, level, z)?;
    let values = basis.eval_all(z);
    let p: Vec<f64> = values.iter().map(|f| f.deriv.re).collect();
    let q: Vec<f64> = values.iter().map(|f| f.deriv.im).collect();
    let n = values.len();

    // |S'|^2 = (sum a p - b q)^2 + (sum a q + b p)^2
    let mut total = 0.0;
    for j in 0..n {
        for m in 0..n {
            let e_aa = cm.cov_aa[(j, m)] + cm.mean_a[j] * cm.mean_a[m];
            let e_bb = cm.cov_bb[(j, m)] + cm.mean_b[j] * cm.mean_b[m];
            let e_ab = cm.cov_ab[(j, m)] + cm.mean_a[j] * cm.mean_b[m];
            let same = p[j] * p[m] + q[j] * q[m];
            let cross = q[j] * p[m] - p[j] * q[m];
            total += (e_aa + e_bb) * same + 2.0 * e_ab * cross;
        }
    }
    Ok(total * cm.density_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::theorem2_density;
    use crate::model::MonomialBasis;

    #[test]
    fn agrees_with_closed_form() {
        let profile = CoefficientProfile::centered(&[1.0, 2.0, 3.0], &[2.0, 1.0, 2.0]).unwrap();
        let basis = MonomialBasis::new(2);
        let level = ComplexLevel::new(1.0, 0.5).unwrap();
        let z = Complex64::new(0.3, 0.4);
        let h = moments_path_density(&profile, &basis, level, z).unwrap();
        let g = theorem2_density(&profile, &basis, level, z).unwrap().h;
        assert!((h - g).abs() <= 1e-9 * g, "{h} vs {g}");
    }

    #[test]
    fn conditioning_matches_schur_complement() {
        // joint covariance of (a_0..a_n, b_0..b_n, X1, X2), conditioned generically
        let profile = CoefficientProfile::centered(&[0.5, 1.5, 2.5], &[1.0, 0.25, 3.0]).unwrap();
        let basis = MonomialBasis::new(2);
        let z = Complex64::new(-0.6, 0.9);
        let level = ComplexLevel::new(0.7, -1.3).unwrap();
        let cm = conditional_moments(&profile, &basis, level, z).unwrap();

        let n = profile.len();
        let values = basis.eval_all(z);
        let mut lin = DMatrix::zeros(2, 2 * n);
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for (j, (l, f)) in profile.laws().iter().zip(&values).enumerate() {
            lin[(0, j)] = f.value.re;
            lin[(1, j)] = f.value.im;
            lin[(0, n + j)] = -f.value.im;
            lin[(1, n + j)] = f.value.re;
            cov[(j, j)] = l.var_a;
            cov[(n + j, n + j)] = l.var_b;
        }
        let cross = &cov * lin.transpose();
        let sxx = &lin * &cross;
        let sxx_inv = sxx.clone().try_inverse().unwrap();
        let mean = &cross * &sxx_inv * DVector::from_vec(vec![level.k1, level.k2]);
        let cond = &cov - &cross * &sxx_inv * cross.transpose();

        for j in 0..n {
            assert!((cm.mean_a[j] - mean[j]).abs() < 1e-13);
            assert!((cm.mean_b[j] - mean[n + j]).abs() < 1e-13);
            for m in 0..n {
                assert!((cm.cov_aa[(j, m)] - cond[(j, m)]).abs() < 1e-13);
                assert!((cm.cov_ab[(j, m)] - cond[(j, n + m)]).abs() < 1e-13);
                assert!((cm.cov_bb[(j, m)] - cond[(n + j, n + m)]).abs() < 1e-13);
            }
        }
        assert!((cm.sigma_xx - Matrix2::from_iterator(sxx.iter().copied())).norm() < 1e-13);
    }
}
