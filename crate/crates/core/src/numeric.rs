//! Small floating-point helpers shared by the density evaluators.

use num_complex::Complex64;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated accumulator for complex values (each part separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `a * b - c * d` with one rounding error (Kahan's FMA trick).
pub fn diff_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    let dop = a.mul_add(b, -cd);
    dop + err
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn diff_of_products_beats_naive_cancellation() {
        let a = 1.0 + f64::EPSILON;
        // a*a - 1 = 2 eps + eps^2; naive evaluation rounds away eps^2
        let exact = 2.0 * f64::EPSILON + f64::EPSILON * f64::EPSILON;
        assert_eq!(diff_of_products(a, a, 1.0, 1.0), exact);
    }

    #[test]
    fn relative_deviation_handles_zero() {
        assert_eq!(relative_deviation(0.0, 0.0), 0.0);
        assert_eq!(relative_deviation(1.0, 0.5), 0.5);
    }
}
