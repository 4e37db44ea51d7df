use crossings::density::DensityModel;
use crossings::model::{CoefficientLaw, CoefficientProfile, ComplexLevel, MonomialBasis, Rectangle};
use crossings::quadrature::{integrate_density, QuadratureOptions};
use num_complex::Complex64;
use std::convert::Infallible;
use std::sync::Arc;

fn opts() -> QuadratureOptions {
    QuadratureOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_cells: 100_000 }
}

fn kac() -> DensityModel {
    let p = CoefficientProfile::iid(3, CoefficientLaw::centered(1.0, 1.0)).unwrap();
    DensityModel::auto(p, Arc::new(MonomialBasis::new(2)), ComplexLevel::new(0.3, -0.2).unwrap()).unwrap()
}

#[test]
fn polynomial_integrands_are_exact() {
    let unit = Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let one = integrate_density(|_| Ok::<_, Infallible>(1.0), &unit, &opts()).unwrap();
    assert!((one.value - 1.0).abs() < 1e-14 && one.converged);
    let xy = integrate_density(|z: Complex64| Ok::<_, Infallible>(z.re * z.im), &unit, &opts()).unwrap();
    assert!((xy.value - 0.25).abs() < 1e-14);
}

#[test]
fn additivity_over_a_split() {
    let model = kac();
    let f = |z| model.evaluate(z);
    let whole = integrate_density(f, &Rectangle::new(-1.0, 2.0, -1.5, 1.0).unwrap(), &opts()).unwrap();
    let parts = [
        Rectangle::new(-1.0, 0.5, -1.5, -0.25).unwrap(),
        Rectangle::new(0.5, 2.0, -1.5, -0.25).unwrap(),
        Rectangle::new(-1.0, 0.5, -0.25, 1.0).unwrap(),
        Rectangle::new(0.5, 2.0, -0.25, 1.0).unwrap(),
    ];
    let mut sum = 0.0;
    let mut err = whole.error_estimate;
    for r in &parts {
        let q = integrate_density(f, r, &opts()).unwrap();
        sum += q.value;
        err += q.error_estimate;
    }
    assert!((whole.value - sum).abs() <= err + 1e-12, "{} vs {sum}", whole.value);
}

#[test]
fn monotone_in_region() {
    let model = kac();
    let f = |z| model.evaluate(z);
    let mut prev = 0.0;
    for half in [0.5, 1.0, 2.0, 4.0] {
        let q = integrate_density(f, &Rectangle::centered_square(half).unwrap(), &opts()).unwrap();
        assert!(q.value + q.error_estimate >= prev);
        prev = q.value;
    }
}

#[test]
fn kac_total_count_close_to_degree() {
    let model = kac();
    let q = integrate_density(|z| model.evaluate(z), &Rectangle::centered_square(20.0).unwrap(), &opts()).unwrap();
    assert!((q.value - 2.0).abs() < 1e-2, "{q:?}");
}

#[test]
fn converged_error_within_tolerance() {
    let model = kac();
    let o = QuadratureOptions { abs_tol: 1e-7, rel_tol: 1e-9, max_cells: 50_000 };
    let q = integrate_density(|z| model.evaluate(z), &Rectangle::centered_square(3.0).unwrap(), &o).unwrap();
    assert!(q.converged);
    assert!(q.error_estimate <= o.abs_tol.max(o.rel_tol * q.value.abs()));
}
