//! Closed-form expected zero densities `h_{N,K}(z)` of `S_N(z) = K` where
//! `S_N(z) = sum_j eta_j f_j(z)`, plus an independent reconstruction from
//! conditional Gaussian moments.
//!
//! Every evaluator returns its intermediate quantities alongside `h` so that
//! the reduction identities between regimes can be checked term by term.
//!
//! | regime                           | evaluator                 |
//! |----------------------------------|---------------------------|
//! | zero means, general variances    | [`theorem2_density`]      |
//! | common variance `sigma^2`        | [`theorem3_density`]      |
//! | arbitrary means                  | [`theorem4_density`]      |
//! | Brownian-increment coefficients  | [`theorem5_density`]      |
//! | `K` with `K1 = K2`, `K = 0`      | [`corollary1_density`], [`corollary2_density`] |
//! | conditional-moment oracle        | [`moments_path_density`]  |

mod checks;
mod corollaries;
mod moments_path;
mod theorem2;
mod theorem3;
mod theorem4;
mod theorem5;

pub use checks::{reduction_report, RandomConfig, ReductionCheck, ReductionReport};
pub use corollaries::{corollary1_density, corollary2_density};
pub use moments_path::{conditional_moments, moments_path_density, ConditionalMoments};
pub use theorem2::{theorem2_density, DensityParts};
pub use theorem3::{theorem3_density, EqualVarianceParts};
pub use theorem4::{theorem4_density, theorem4_density_with, DensityPartsGeneral, Theorem4Reading};
pub use theorem5::{theorem5_density, theorem5_direct};

use crate::model::{BasisFamily, CoefficientProfile, ComplexLevel, ModelError};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

/// Relative threshold below which `Y1 Y3 - Y2^2` is treated as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("this evaluator requires zero coefficient means")]
    NonZeroMeans,
    #[error("evaluator requires a common variance for real and imaginary parts at every index")]
    UnequalVariances,
    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("circle radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("basis has {basis} functions but profile has {profile} entries")]
    LengthMismatch { basis: usize, profile: usize },
    #[error("covariance of (Re S, Im S) is singular at z = {z} (det {det:e}, scale {scale:e})")]
    DegenerateCovariance { z: Complex64, det: f64, scale: f64 },
    #[error("every basis function vanishes at z = {z}")]
    DegeneratePoint { z: Complex64 },
}

pub(crate) fn check_lengths(
    profile: &CoefficientProfile,
    basis: &dyn BasisFamily,
) -> Result<(), DensityError> {
    if profile.len() != basis.len() {
        return Err(DensityError::LengthMismatch {
            basis: basis.len(),
            profile: profile.len(),
        });
    }
    Ok(())
}

/// Which closed form a [`DensityModel`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Zero means, general variances.
    General,
    /// Common variance.
    EqualVariance,
    /// Arbitrary means.
    NonzeroMean,
    /// Brownian prefix basis (zero means by construction).
    Brownian,
}

impl Theorem {
    pub fn number(self) -> u8 {
        match self {
            Theorem::General => 2,
            Theorem::EqualVariance => 3,
            Theorem::NonzeroMean => 4,
            Theorem::Brownian => 5,
        }
    }
}

/// A fully configured density `z -> h(z)`.
#[derive(Clone)]
pub struct DensityModel {
    pub profile: CoefficientProfile,
    pub basis: Arc<dyn BasisFamily>,
    pub level: ComplexLevel,
    pub theorem: Theorem,
}

impl DensityModel {
    /// Validates that `theorem` is applicable to `profile`.
    pub fn new(
        profile: CoefficientProfile,
        basis: Arc<dyn BasisFamily>,
        level: ComplexLevel,
        theorem: Theorem,
    ) -> Result<Self, DensityError> {
        check_lengths(&profile, basis.as_ref())?;
        match theorem {
            Theorem::General | Theorem::Brownian if !profile.is_zero_mean() => {
                return Err(DensityError::NonZeroMeans)
            }
            Theorem::EqualVariance => {
                if !profile.is_zero_mean() {
                    return Err(DensityError::NonZeroMeans);
                }
                if profile.common_variance().is_none() {
                    return Err(DensityError::UnequalVariances);
                }
            }
            _ => {}
        }
        Ok(Self {
            profile,
            basis,
            level,
            theorem,
        })
    }

    /// Picks the most specific closed form: common variance, then nonzero
    /// means, then the general zero-mean form. Brownian models are built by
    /// the caller.
    pub fn auto(
        profile: CoefficientProfile,
        basis: Arc<dyn BasisFamily>,
        level: ComplexLevel,
    ) -> Result<Self, DensityError> {
        let theorem = if !profile.is_zero_mean() {
            Theorem::NonzeroMean
        } else if profile.common_variance().is_some() {
            Theorem::EqualVariance
        } else {
            Theorem::General
        };
        Self::new(profile, basis, level, theorem)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<f64, DensityError> {
        let basis = self.basis.as_ref();
        match self.theorem {
            Theorem::General | Theorem::Brownian => {
                theorem2_density(&self.profile, basis, self.level, z).map(|p| p.h)
            }
            Theorem::EqualVariance => {
                let sigma2 = self
                    .profile
                    .common_variance()
                    .ok_or(DensityError::UnequalVariances)?;
                theorem3_density(sigma2, basis, self.level, z).map(|p| p.h)
            }
            Theorem::NonzeroMean => {
                theorem4_density(&self.profile, basis, self.level, z).map(|p| p.h)
            }
        }
    }
}

impl std::fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DensityModel")
            .field("profile", &self.profile)
            .field("basis_len", &self.basis.len())
            .field("level", &self.level)
            .field("theorem", &self.theorem)
            .finish()
    }
}
