//! Values frozen from an independent 40-digit computation (quadratic and
//! cubic gauge equations solved in arbitrary precision).

use num_complex::Complex64;
use squeeze_core::domains::{DVector, Domain, DomainSpec, Exponent, Point};
use squeeze_core::gauge::{d_minkowski_gauge, gauge_of_sublevel, minkowski_gauge, GaugeMethod};
use squeeze_core::invariants::{caratheodory_star_sandwich, poincare};

fn dv(v: &[u32]) -> DVector {
    DVector::new(v.to_vec()).unwrap()
}

fn dom(spec: DomainSpec) -> Domain {
    Domain::new(spec).unwrap()
}

fn assert_close(actual: f64, expected: f64, tol: f64) {
    assert!((actual - expected).abs() <= tol, "{actual} vs {expected}");
}

#[test]
fn ball_with_mixed_weights() {
    // 0.09/t² + 0.16/t⁴ = 1
    let g =
        d_minkowski_gauge(&dom(DomainSpec::ball(2, 1.0)), &dv(&[1, 2]), &Point::real(&[0.3, 0.4]).unwrap()).unwrap();
    assert_eq!(g.method, GaugeMethod::Bisection);
    assert_close(g.value, 0.668_971_816_485_249_7, 1e-12);
}

#[test]
fn complex_ellipsoid_unweighted() {
    let e = dom(DomainSpec::gen_ellipsoid(vec![1, 1], vec![Exponent::Finite(1.0), Exponent::Finite(2.0)]));
    let g = minkowski_gauge(&e, &Point::real(&[0.5, 0.5]).unwrap()).unwrap();
    assert_close(g.value, 0.636_009_824_757_034_5, 1e-12);
}

#[test]
fn weighted_power_cubic() {
    // 0.16/t² + 2·0.027/t³ = 1
    let wpd = dom(DomainSpec::weighted_power(vec![1.0, 2.0], vec![1.0, 1.5]));
    let g = minkowski_gauge(&wpd, &Point::real(&[0.4, 0.3]).unwrap()).unwrap();
    assert_close(g.value, 0.514_699_509_217_454_2, 1e-12);
}

#[test]
fn ellipsoid_with_an_infinite_block() {
    let e = dom(DomainSpec::gen_ellipsoid(vec![2, 1], vec![Exponent::Finite(2.0), Exponent::Infinite]));
    let z = Point::real(&[0.2, 0.1, 0.3]).unwrap();
    // finite block: 0.04/t² + 0.01/t⁴ = 1 dominates the bound 0.3 from the last coordinate
    assert_close(d_minkowski_gauge(&e, &dv(&[1, 2, 1]), &z).unwrap().value, 0.349_256_911_559_178_3, 1e-12);
    // with weight 3 the last coordinate dominates: 0.3^{1/3}
    assert_close(d_minkowski_gauge(&e, &dv(&[1, 2, 3]), &z).unwrap().value, 0.669_432_950_082_169_5, 1e-12);
}

#[test]
fn sublevel_rescales_the_gauge() {
    let g = gauge_of_sublevel(&dom(DomainSpec::ball(2, 1.0)), &dv(&[1, 2]), 0.5, &Point::real(&[0.1, 0.05]).unwrap())
        .unwrap();
    assert_close(g.value, 0.470_103_725_173_942_7, 1e-11);
}

#[test]
fn phases_do_not_matter() {
    let ball = dom(DomainSpec::ball(2, 1.0));
    let z = Point::new(vec![Complex64::from_polar(0.3, 1.1), Complex64::from_polar(0.4, -2.0)]).unwrap();
    let b = caratheodory_star_sandwich(&ball, &dv(&[1, 2]), &z).unwrap();
    assert_close(b.upper, 0.668_971_816_485_249_7, 1e-12);
    assert_close(b.lower, 0.668_971_816_485_249_7f64.powi(2), 1e-12);
}

#[test]
fn poincare_symmetric_pair() {
    assert_close(
        poincare(Complex64::new(0.3, 0.0), Complex64::new(-0.3, 0.0)).unwrap(),
        0.619_039_208_406_223_4,
        1e-15,
    );
}
