//! Coefficients observed along a complex Brownian path.
//!
//! With `A_j + i B_j = W(t_j)` the sum rearranges to `sum_k F_k(z) Delta_k`
//! where `F_k = sum_{j >= k} f_j` and the increments `Delta_k` are
//! independent with variance `t_k - t_{k-1}` per part, so the zero-mean
//! form applies to the prefix-sum basis.

use super::theorem2::{theorem2_density, DensityParts, ZeroMeanSums};
use super::DensityError;
use crate::model::{build_brownian_basis, BasisFamily, BasisValue, ComplexLevel, TimeGrid};
use num_complex::Complex64;
use std::sync::Arc;

/// Zero-mean density for the prefix-sum basis built from `inner` and `grid`.
pub fn theorem5_density(
    inner: Arc<dyn BasisFamily>,
    grid: &TimeGrid,
    level: ComplexLevel,
    z: Complex64,
) -> Result<DensityParts, DensityError> {
    let (basis, profile) = build_brownian_basis(inner, grid)?;
    theorem2_density(&profile, &basis, level, z)
}

/// Same density, with every `Y`/`D` sum written out over explicit inner
/// suffix sums instead of going through the prefix-sum basis.
pub fn theorem5_direct(
    inner: &dyn BasisFamily,
    grid: &TimeGrid,
    level: ComplexLevel,
    z: Complex64,
) -> Result<DensityParts, DensityError> {
    if inner.len() != grid.len() {
        return Err(crate::model::ModelError::LengthMismatch {
            what: "time grid",
            got: grid.len(),
            expected: inner.len(),
        }
        .into());
    }
    let values = inner.eval_all(z);
    let increments = grid.increments();
    if let Some((index, &v)) = increments.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(crate::model::ModelError::DegenerateVariance {
            index,
            var_a: v,
            var_b: v,
        }
        .into());
    }
    let n = values.len();
    let terms = (0..n).map(|k| {
        let mut u = 0.0;
        let mut v = 0.0;
        let mut du = 0.0;
        let mut dv = 0.0;
        for f in &values[k..] {
            u += f.value.re;
            v += f.value.im;
            du += f.deriv.re;
            dv += f.deriv.im;
        }
        let suffix = BasisValue {
            value: Complex64::new(u, v),
            deriv: Complex64::new(du, dv),
        };
        (increments[k], increments[k], suffix)
    });
    ZeroMeanSums::accumulate(terms).assemble(level, z)
}
