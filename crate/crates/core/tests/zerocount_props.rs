use crossings::density::DensityModel;
use crossings::model::{BasisFamily, CoefficientLaw, CoefficientProfile, ComplexLevel, MonomialBasis, PrefixSumBasis, Rectangle};
use crossings::quadrature::{integrate_density, QuadratureOptions};
use crossings::zerocount::{
    count_zeros_companion, count_zeros_winding, draw_coefficients, estimate_expected_count, polynomial_roots,
};
use num_complex::Complex64;
use std::sync::Arc;

#[test]
fn counts_are_bounded_by_degree() {
    let p = CoefficientProfile::iid(5, CoefficientLaw::centered(1.0, 2.0)).unwrap();
    let basis = MonomialBasis::new(4);
    let r = Rectangle::centered_square(3.0).unwrap();
    for t in 0..300 {
        let c = draw_coefficients(&p, 12, t);
        let n = count_zeros_winding(&c, &basis, ComplexLevel::zero(), &r).unwrap();
        assert!(n <= 4);
    }
}

#[test]
fn winding_agrees_with_companion_for_prefix_basis() {
    let p = CoefficientProfile::centered(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0, 1.0, 1.0]).unwrap();
    let basis = PrefixSumBasis::new(Arc::new(MonomialBasis::new(3)));
    let level = ComplexLevel::new(0.5, -0.5).unwrap();
    let r = Rectangle::new(-1.0, 1.5, -0.5, 1.0).unwrap();
    for t in 0..300 {
        let c = draw_coefficients(&p, 3, t);
        let poly = basis.polynomial_coefficients(&c).unwrap();
        assert_eq!(
            count_zeros_winding(&c, &basis, level, &r).unwrap(),
            count_zeros_companion(&poly, level, &r).unwrap()
        );
    }
}

#[test]
fn roots_reconstruct_polynomial() {
    let roots_in = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, -1.5)];
    // (z - r0)(z - r1)(z - r2), lowest degree first
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for r in roots_in {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        poly = next;
    }
    let found = polynomial_roots(&poly).unwrap();
    for r in roots_in {
        assert!(found.iter().any(|f| (f - r).norm() < 1e-10));
    }
}

#[test]
fn kac_count_over_large_square_is_degree() {
    let p = CoefficientProfile::iid(3, CoefficientLaw::centered(1.0, 1.0)).unwrap();
    let r = Rectangle::centered_square(20.0).unwrap();
    let e = estimate_expected_count(&p, &MonomialBasis::new(2), ComplexLevel::zero(), &r, 10_000, 31).unwrap();
    assert!((e.mean - 2.0).abs() <= 3.0 * e.std_error.max(1e-3), "{e:?}");
}

#[test]
fn mc_matches_quadrature_on_unit_square() {
    let p = CoefficientProfile::iid(3, CoefficientLaw::centered(1.0, 1.0)).unwrap();
    let basis = Arc::new(MonomialBasis::new(2));
    let r = Rectangle::centered_square(1.0).unwrap();
    let model = DensityModel::auto(p.clone(), basis.clone(), ComplexLevel::zero()).unwrap();
    let q = integrate_density(|z| model.evaluate(z), &r, &QuadratureOptions::default()).unwrap();
    let e = estimate_expected_count(&p, basis.as_ref(), ComplexLevel::zero(), &r, 10_000, 44).unwrap();
    assert!((q.value - e.mean).abs() <= 3.0 * e.std_error + q.error_estimate, "{q:?} {e:?}");
}

#[test]
fn estimate_is_independent_of_thread_count() {
    let p = CoefficientProfile::iid(4, CoefficientLaw::centered(1.0, 0.5)).unwrap();
    let basis = MonomialBasis::new(3);
    let r = Rectangle::new(0.0, 2.0, -1.0, 1.0).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_expected_count(&p, &basis, ComplexLevel::zero(), &r, 2_000, 8).unwrap())
    };
    assert_eq!(run(1), run(4));
}
