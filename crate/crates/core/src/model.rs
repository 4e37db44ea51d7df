//! Domain types: coefficient laws, basis families, levels, regions and time
//! grids, plus the prefix-sum basis used for Brownian-increment coefficients.
//!
//! All types are immutable after construction and can be shared freely
//! between threads.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coefficient profile needs at least 2 entries, got {0}")]
    TooFewCoefficients(usize),
    #[error("variance at index {index} must be positive and finite (var_a = {var_a}, var_b = {var_b})")]
    DegenerateVariance { index: usize, var_a: f64, var_b: f64 },
    #[error("mean at index {index} is not finite")]
    NonFiniteMean { index: usize },
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("level components must be finite")]
    NonFiniteLevel,
    #[error("invalid rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}]")]
    InvalidRectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    #[error("time grid must be finite, nonnegative and strictly increasing (index {0})")]
    InvalidTimeGrid(usize),
    #[error("basis weight at index {0} is not finite")]
    NonFiniteWeight(usize),
    #[error("basis function {index} fails the holomorphy check at z = {z}: derivative {deriv}, difference quotient {quotient}")]
    NotHolomorphic {
        index: usize,
        z: Complex64,
        deriv: Complex64,
        quotient: Complex64,
    },
    #[error("basis function {index} is not real at x = {x}: value {value}, derivative {deriv}")]
    NotRealOnRealLine {
        index: usize,
        x: f64,
        value: Complex64,
        deriv: Complex64,
    },
}

/// Law of one coefficient `eta_j = a_j + i b_j` with `a_j ~ N(mu_a, var_a)`
/// and `b_j ~ N(mu_b, var_b)` independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientLaw {
    pub mu_a: f64,
    pub var_a: f64,
    pub mu_b: f64,
    pub var_b: f64,
}

impl CoefficientLaw {
    pub fn centered(var_a: f64, var_b: f64) -> Self {
        Self {
            mu_a: 0.0,
            var_a,
            mu_b: 0.0,
            var_b,
        }
    }

    /// `E(eta_j)`.
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.mu_a, self.mu_b)
    }
}

/// Per-index means and variances of the coefficient sequence, `N + 1`
/// entries. Variances are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    laws: Vec<CoefficientLaw>,
}

impl CoefficientProfile {
    pub fn new(laws: Vec<CoefficientLaw>) -> Result<Self, ModelError> {
        if laws.len() < 2 {
            return Err(ModelError::TooFewCoefficients(laws.len()));
        }
        for (index, law) in laws.iter().enumerate() {
            let ok = |v: f64| v.is_finite() && v > 0.0;
            if !ok(law.var_a) || !ok(law.var_b) {
                return Err(ModelError::DegenerateVariance {
                    index,
                    var_a: law.var_a,
                    var_b: law.var_b,
                });
            }
            if !law.mu_a.is_finite() || !law.mu_b.is_finite() {
                return Err(ModelError::NonFiniteMean { index });
            }
        }
        Ok(Self { laws })
    }

    /// Same law at every index.
    pub fn iid(len: usize, law: CoefficientLaw) -> Result<Self, ModelError> {
        Self::new(vec![law; len])
    }

    /// Zero-mean profile from per-index variances of the real and imaginary
    /// parts.
    pub fn centered(var_a: &[f64], var_b: &[f64]) -> Result<Self, ModelError> {
        if var_a.len() != var_b.len() {
            return Err(ModelError::LengthMismatch {
                what: "var_b",
                got: var_b.len(),
                expected: var_a.len(),
            });
        }
        Self::new(
            var_a
                .iter()
                .zip(var_b)
                .map(|(&a, &b)| CoefficientLaw::centered(a, b))
                .collect(),
        )
    }

    pub fn laws(&self) -> &[CoefficientLaw] {
        &self.laws
    }

    /// Number of coefficients, `N + 1`.
    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.laws.len() - 1
    }

    pub fn is_zero_mean(&self) -> bool {
        self.laws.iter().all(|l| l.mu_a == 0.0 && l.mu_b == 0.0)
    }

    /// `Some(sigma^2)` when every real and imaginary part has that variance.
    pub fn common_variance(&self) -> Option<f64> {
        let s = self.laws[0].var_a;
        self.laws
            .iter()
            .all(|l| l.var_a == s && l.var_b == s)
            .then_some(s)
    }

    /// Copy of this profile with every mean set to zero.
    pub fn without_means(&self) -> Self {
        Self {
            laws: self
                .laws
                .iter()
                .map(|l| CoefficientLaw::centered(l.var_a, l.var_b))
                .collect(),
        }
    }
}

/// Target level `K = k1 + i k2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLevel {
    pub k1: f64,
    pub k2: f64,
}

impl ComplexLevel {
    pub fn new(k1: f64, k2: f64) -> Result<Self, ModelError> {
        if !k1.is_finite() || !k2.is_finite() {
            return Err(ModelError::NonFiniteLevel);
        }
        Ok(Self { k1, k2 })
    }

    pub const fn zero() -> Self {
        Self { k1: 0.0, k2: 0.0 }
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.k1, self.k2)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]` in the complex
/// plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, ModelError> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(ModelError::InvalidRectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// Square `[-half, half]^2`.
    pub fn centered_square(half: f64) -> Result<Self, ModelError> {
        Self::new(-half, half, -half, half)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains_strictly(&self, z: Complex64) -> bool {
        z.re > self.x_min && z.re < self.x_max && z.im > self.y_min && z.im < self.y_max
    }

    /// Distance from `z` to the boundary of the rectangle (for points inside
    /// or outside).
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let dx = if z.re < self.x_min {
            self.x_min - z.re
        } else if z.re > self.x_max {
            z.re - self.x_max
        } else {
            0.0
        };
        let dy = if z.im < self.y_min {
            self.y_min - z.im
        } else if z.im > self.y_max {
            z.im - self.y_max
        } else {
            0.0
        };
        if dx > 0.0 || dy > 0.0 {
            return dx.hypot(dy);
        }
        (z.re - self.x_min)
            .min(self.x_max - z.re)
            .min(z.im - self.y_min)
            .min(self.y_max - z.im)
    }

    /// Counterclockwise corners starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x_min, self.y_min),
            Complex64::new(self.x_max, self.y_min),
            Complex64::new(self.x_max, self.y_max),
            Complex64::new(self.x_min, self.y_max),
        ]
    }

    /// Halves the rectangle across its longer side.
    pub fn bisect(&self) -> (Rectangle, Rectangle) {
        if self.width() >= self.height() {
            let mid = 0.5 * (self.x_min + self.x_max);
            (
                Rectangle { x_max: mid, ..*self },
                Rectangle { x_min: mid, ..*self },
            )
        } else {
            let mid = 0.5 * (self.y_min + self.y_max);
            (
                Rectangle { y_max: mid, ..*self },
                Rectangle { y_min: mid, ..*self },
            )
        }
    }
}

/// Observation times `t_0 < t_1 < ... < t_N`, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, ModelError> {
        let mut prev = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 || (i > 0 && t <= prev) {
                return Err(ModelError::InvalidTimeGrid(i));
            }
            prev = t;
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_k - t_{k-1}` with `t_{-1} = 0`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }
}

/// Value and complex derivative of one basis function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisValue {
    pub value: Complex64,
    pub deriv: Complex64,
}

impl BasisValue {
    pub const ZERO: BasisValue = BasisValue {
        value: Complex64::new(0.0, 0.0),
        deriv: Complex64::new(0.0, 0.0),
    };
}

/// A finite family `f_0, ..., f_N` of entire functions that are real on the
/// real axis.
pub trait BasisFamily: Send + Sync {
    /// Number of functions, `N + 1`.
    fn len(&self) -> usize;

    /// `f_j(z)` and `f_j'(z)`.
    fn eval(&self, j: usize, z: Complex64) -> BasisValue;

    /// All `N + 1` values and derivatives at `z`.
    fn eval_all(&self, z: Complex64) -> Vec<BasisValue> {
        (0..self.len()).map(|j| self.eval(j, z)).collect()
    }

    /// `sum_j coeffs[j] f_j(z)`.
    fn combine(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        self.eval_all(z)
            .iter()
            .zip(coeffs)
            .map(|(b, c)| c * b.value)
            .sum()
    }

    /// Monomial coefficients of `sum_j coeffs[j] f_j` (lowest degree first)
    /// when the family spans polynomials, `None` otherwise.
    fn polynomial_coefficients(&self, _coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
        None
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `f_j(z) = z^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonomialBasis {
    degree: usize,
}

impl MonomialBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }
}

impl BasisFamily for MonomialBasis {
    fn len(&self) -> usize {
        self.degree + 1
    }

    fn eval(&self, j: usize, z: Complex64) -> BasisValue {
        let deriv = if j == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            j as f64 * z.powu(j as u32 - 1)
        };
        BasisValue {
            value: z.powu(j as u32),
            deriv,
        }
    }

    fn eval_all(&self, z: Complex64) -> Vec<BasisValue> {
        let mut out = Vec::with_capacity(self.len());
        let mut prev = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for j in 0..self.len() {
            out.push(BasisValue {
                value: pow,
                deriv: j as f64 * prev,
            });
            prev = pow;
            pow *= z;
        }
        out
    }

    fn combine(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn polynomial_coefficients(&self, coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
        Some(coeffs.to_vec())
    }
}

/// `f_j(z) = w_j z^j` for real weights `w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMonomialBasis {
    weights: Vec<f64>,
}

impl WeightedMonomialBasis {
    pub fn new(weights: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(ModelError::NonFiniteWeight(i));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl BasisFamily for WeightedMonomialBasis {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, j: usize, z: Complex64) -> BasisValue {
        let m = MonomialBasis::new(j).eval(j, z);
        BasisValue {
            value: self.weights[j] * m.value,
            deriv: self.weights[j] * m.deriv,
        }
    }

    fn eval_all(&self, z: Complex64) -> Vec<BasisValue> {
        let mut out = MonomialBasis::new(self.len() - 1).eval_all(z);
        for (b, &w) in out.iter_mut().zip(&self.weights) {
            b.value *= w;
            b.deriv *= w;
        }
        out
    }

    fn polynomial_coefficients(&self, coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
        Some(coeffs.iter().zip(&self.weights).map(|(c, w)| c * w).collect())
    }
}

/// Suffix sums `F_k(z) = sum_{j >= k} f_j(z)` of an inner family.
#[derive(Clone)]
pub struct PrefixSumBasis {
    inner: Arc<dyn BasisFamily>,
}

impl PrefixSumBasis {
    pub fn new(inner: Arc<dyn BasisFamily>) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &Arc<dyn BasisFamily> {
        &self.inner
    }
}

impl fmt::Debug for PrefixSumBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrefixSumBasis")
            .field("len", &self.inner.len())
            .finish()
    }
}

impl BasisFamily for PrefixSumBasis {
    fn len(&self) -> usize {
        self.inner.len()
    }

    fn eval(&self, k: usize, z: Complex64) -> BasisValue {
        (k..self.inner.len())
            .map(|j| self.inner.eval(j, z))
            .fold(BasisValue::ZERO, |acc, b| BasisValue {
                value: acc.value + b.value,
                deriv: acc.deriv + b.deriv,
            })
    }

    fn eval_all(&self, z: Complex64) -> Vec<BasisValue> {
        let mut out = self.inner.eval_all(z);
        for k in (0..out.len().saturating_sub(1)).rev() {
            let next = out[k + 1];
            out[k].value += next.value;
            out[k].deriv += next.deriv;
        }
        out
    }

    fn polynomial_coefficients(&self, coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
        // sum_k c_k F_k = sum_j (c_0 + ... + c_j) f_j
        let cumulative: Vec<Complex64> = coeffs
            .iter()
            .scan(Complex64::new(0.0, 0.0), |acc, c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        self.inner.polynomial_coefficients(&cumulative)
    }
}

type ComplexFn = Box<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// User-supplied `(f_j, f_j')` callback pairs. Derivatives are trusted; call
/// [`check_holomorphy`] to validate them.
pub struct TabulatedBasis {
    funcs: Vec<(ComplexFn, ComplexFn)>,
}

impl TabulatedBasis {
    pub fn new() -> Self {
        Self { funcs: Vec::new() }
    }

    pub fn with<F, G>(mut self, value: F, deriv: G) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        G: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.funcs.push((Box::new(value), Box::new(deriv)));
        self
    }
}

impl Default for TabulatedBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for TabulatedBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedBasis")
            .field("len", &self.funcs.len())
            .finish()
    }
}

impl BasisFamily for TabulatedBasis {
    fn len(&self) -> usize {
        self.funcs.len()
    }

    fn eval(&self, j: usize, z: Complex64) -> BasisValue {
        let (f, df) = &self.funcs[j];
        BasisValue {
            value: f(z),
            deriv: df(z),
        }
    }
}

/// Prefix-sum basis and increment profile for coefficients that are
/// successive observations `W(t_j)` of a complex Brownian motion.
///
/// Returns `F_k = sum_{j >= k} f_j` together with a zero-mean profile whose
/// real and imaginary variances at index `k` are `t_k - t_{k-1}`.
pub fn build_brownian_basis(
    inner: Arc<dyn BasisFamily>,
    grid: &TimeGrid,
) -> Result<(PrefixSumBasis, CoefficientProfile), ModelError> {
    if inner.len() != grid.len() {
        return Err(ModelError::LengthMismatch {
            what: "time grid",
            got: grid.len(),
            expected: inner.len(),
        });
    }
    let inc = grid.increments();
    let profile = CoefficientProfile::centered(&inc, &inc)?;
    Ok((PrefixSumBasis::new(inner), profile))
}

/// Compares every `f_j'` against complex central differences along both
/// axes at the given points. The tolerance is `rel_tol * max(|f_j'|, |f_j|)`.
pub fn check_holomorphy(
    basis: &dyn BasisFamily,
    points: &[Complex64],
    step: f64,
    rel_tol: f64,
) -> Result<(), ModelError> {
    let dx = Complex64::new(step, 0.0);
    let dy = Complex64::new(0.0, step);
    for &z in points {
        for j in 0..basis.len() {
            let here = basis.eval(j, z);
            let scale = here.deriv.norm().max(here.value.norm());
            for d in [dx, dy] {
                let quotient = (basis.eval(j, z + d).value - basis.eval(j, z - d).value) / (2.0 * d);
                if (quotient - here.deriv).norm() > rel_tol * scale {
                    return Err(ModelError::NotHolomorphic {
                        index: j,
                        z,
                        deriv: here.deriv,
                        quotient,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Checks `|Im f_j(x)| < 1e-12 (1 + |f_j(x)|)` and the same for `f_j'` at
/// each real `x`.
pub fn check_real_on_real(basis: &dyn BasisFamily, xs: &[f64]) -> Result<(), ModelError> {
    const TOL: f64 = 1e-12;
    for &x in xs {
        let z = Complex64::new(x, 0.0);
        for (index, b) in basis.eval_all(z).into_iter().enumerate() {
            let bad_value = b.value.im.abs() >= TOL * (1.0 + b.value.norm());
            let bad_deriv = b.deriv.im.abs() >= TOL * (1.0 + b.deriv.norm());
            if bad_value || bad_deriv {
                return Err(ModelError::NotRealOnRealLine {
                    index,
                    x,
                    value: b.value,
                    deriv: b.deriv,
                });
            }
        }
    }
    Ok(())
}
