use std::f64::consts::PI;

use noma_core::channel::GainDistribution;
use noma_core::numerics::{integrate_to_infinity, QuadratureSpec};
use noma_core::{ChebyshevModel, Geometry};

fn model(r: f64, alpha: f64, n: usize) -> ChebyshevModel {
    ChebyshevModel::new(&Geometry::new(r, alpha, 1).unwrap(), n).unwrap()
}

#[test]
fn coefficients_match_node_formulas() {
    let (r, alpha, n) = (5.0, 3.0, 10);
    let m = ChebyshevModel::unnormalized(&Geometry::new(r, alpha, 1).unwrap(), n).unwrap();
    let w = PI / n as f64;
    let mut b_sum = 0.0;
    for k in 1..=n {
        let theta = ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos();
        let x = r / 2.0 * theta + r / 2.0;
        let c = 1.0 + x.powf(alpha);
        let b = -w * (1.0 - theta * theta).sqrt() * x;
        assert!((m.nodes()[k - 1] - theta).abs() < 1e-15);
        assert!((m.c()[k] - c).abs() < 1e-12 * c);
        assert!((m.b()[k] - b).abs() < 1e-14);
        assert!((m.beta()[k] + b * c).abs() < 1e-12 * (b * c).abs());
        b_sum += b;
    }
    assert_eq!(m.c()[0], 0.0);
    assert!((m.b()[0] + b_sum).abs() < 1e-14);
    assert!(m.b().iter().sum::<f64>().abs() < 1e-13);
    assert!((m.weight() - w).abs() < 1e-15);
}

#[test]
fn normalized_model_is_a_distribution() {
    let spec = QuadratureSpec::default();
    for (r, alpha) in [(5.0, 2.0), (5.0, 3.0), (10.0, 3.0)] {
        let m = model(r, alpha, 10);
        assert!((m.b()[0] - r).abs() < 1e-12);
        assert!(m.b().iter().sum::<f64>().abs() < 1e-12);
        assert!(m.cdf_approx(0.0).unwrap().abs() < 1e-14);
        assert!((m.cdf_approx(1e6).unwrap() - 1.0).abs() < 1e-9);
        let mass = integrate_to_infinity(|y| m.pdf(y), 0.0, &spec).unwrap();
        assert!((mass - 1.0).abs() < 1e-9, "({r},{alpha}) mass {mass}");
    }
}

#[test]
fn raw_constants_overshoot_one() {
    let g = Geometry::new(5.0, 3.0, 1).unwrap();
    let raw = ChebyshevModel::unnormalized(&g, 10).unwrap();
    let expected = (PI / 20.0) / (PI / 20.0).sin();
    assert!((raw.cdf_approx(1e6).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn pdf_matches_finite_difference() {
    let m = model(5.0, 3.0, 10);
    for y in [0.0005f64, 0.01, 0.1, 1.0, 5.0] {
        let h = 1e-6 * y.max(1e-3);
        let fd = (m.cdf_approx(y + h).unwrap() - m.cdf_approx(y - h).unwrap()) / (2.0 * h);
        let pdf = m.pdf_approx(y).unwrap();
        assert!(
            (fd - pdf).abs() < 1e-6 * pdf.max(1.0),
            "y={y}: {fd} vs {pdf}"
        );
    }
}

#[test]
fn survival_agrees_with_one_minus_cdf() {
    let m = model(5.0, 2.0, 10);
    for y in [0.0, 0.1, 1.0, 10.0] {
        let s = m.survival_approx(y);
        assert!((s - (1.0 - m.cdf_approx(y).unwrap())).abs() < 1e-13);
    }
    // Far tail: the direct sum keeps relative accuracy where 1 - F cancels.
    let s = m.survival_approx(30.0);
    assert!(s > 0.0 && s < 1e-12);
}

#[test]
fn cdf_is_monotone() {
    let m = model(5.0, 3.0, 10);
    let mut prev = 0.0;
    for i in 1..=5000 {
        let y = 50.0 * (i as f64 / 5000.0).powi(3);
        let f = m.cdf_approx(y).unwrap();
        assert!(f >= prev - 1e-15, "y={y}");
        prev = f;
    }
}

#[test]
fn small_y_linearization_is_second_order() {
    let m = model(5.0, 3.0, 10);
    let err = |y: f64| (m.cdf_approx(y).unwrap() - m.small_y_cdf(y)).abs();
    let ratio = err(2e-4) / err(1e-4);
    assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    let perr = |y: f64| (m.pdf_approx(y).unwrap() - m.small_y_pdf(y)).abs();
    let ratio = perr(2e-4) / perr(1e-4);
    assert!((ratio - 4.0).abs() < 0.8, "pdf ratio {ratio}");
}

#[test]
fn eta_is_the_density_at_zero() {
    let m = model(5.0, 3.0, 10);
    assert!((m.eta() - m.pdf_approx(0.0).unwrap()).abs() < 1e-12 * m.eta());
}

#[test]
fn error_shrinks_with_order() {
    let g = Geometry::new(5.0, 3.0, 1).unwrap();
    let exact = g.exact();
    let max_err = |n: usize| {
        let m = ChebyshevModel::new(&g, n).unwrap();
        (0..=400)
            .map(|i| {
                let y = 20.0 * (i as f64 / 400.0).powi(2);
                (m.cdf(y) - exact.cdf(y)).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e10, e40) = (max_err(10), max_err(40));
    assert!(e40 < e10 / 3.0, "{e10} {e40}");
    assert!(e40 < 1e-3);
}

#[test]
fn rejects_bad_arguments() {
    let m = model(5.0, 3.0, 10);
    assert!(m.cdf_approx(-1e-9).is_err());
    assert!(m.pdf_approx(f64::NAN).is_err());
    assert!(ChebyshevModel::new(&Geometry::new(5.0, 3.0, 1).unwrap(), 0).is_err());
}

#[test]
fn slowest_node_is_last() {
    for (r, alpha) in [(5.0, 2.0), (10.0, 4.0)] {
        let m = model(r, alpha, 10);
        assert_eq!(m.slowest_node(), 10);
    }
}
