use noma_core::channel::GainDistribution;
use noma_core::ergodic::{
    composition_count, composition_weight, composition_weight_direct, enumerate_compositions,
    ergodic_high_snr, growth_function, growth_limit, whittaker_term,
};
use noma_core::noma::default_allocation;
use noma_core::numerics::{exp_e1, integrate_to_infinity, log_multinomial, QuadratureSpec};
use noma_core::{db_to_linear, ChebyshevModel, Error, Geometry};

fn spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-13, 1e-12, 100_000).unwrap()
}

#[test]
fn whittaker_term_matches_laplace_integral() {
    for z in [0.01, 0.1, 1.0, 10.0, 300.0] {
        let direct = integrate_to_infinity(|t| (-z * t).exp() / (1.0 + t), 0.0, &spec()).unwrap();
        let w = whittaker_term(z).unwrap();
        assert!(
            (w - direct).abs() < 1e-10 * direct.max(1.0),
            "z={z}: {w} vs {direct}"
        );
    }
}

#[test]
fn e1_matches_tail_integral() {
    for z in [0.2, 1.0, 5.0] {
        let direct = integrate_to_infinity(|t| (-t).exp() / t, z, &spec()).unwrap();
        assert!((exp_e1(z).unwrap() - direct).abs() < 1e-11);
    }
}

#[test]
fn single_user_formula_matches_numeric_expectation() {
    let g = Geometry::new(5.0, 2.0, 1).unwrap();
    let model = ChebyshevModel::new(&g, 10).unwrap();
    let alloc = default_allocation(1).unwrap();
    for snr in [0.0, 20.0, 40.0] {
        let rho = db_to_linear(snr);
        let direct = integrate_to_infinity(
            |x| (rho * x).ln_1p() / std::f64::consts::LN_2 * model.pdf(x),
            0.0,
            &spec(),
        )
        .unwrap();
        let closed = ergodic_high_snr(&model, &alloc, rho).unwrap();
        assert!(
            (closed - direct).abs() < 1e-8,
            "snr={snr}: {closed} vs {direct}"
        );
    }
}

#[test]
fn two_user_strong_term_matches_numeric_expectation() {
    // With M=2 the E1 part is E[log2(1 + rho a_2 X)], X the larger of two gains.
    let g = Geometry::new(5.0, 3.0, 2).unwrap();
    let model = ChebyshevModel::new(&g, 6).unwrap();
    let alloc = default_allocation(2).unwrap();
    let rho = db_to_linear(30.0);
    let direct = integrate_to_infinity(
        |x| (rho * 0.2 * x).ln_1p() / std::f64::consts::LN_2 * 2.0 * model.cdf(x) * model.pdf(x),
        0.0,
        &spec(),
    )
    .unwrap();
    let closed = ergodic_high_snr(&model, &alloc, rho).unwrap() - 5f64.log2();
    assert!((closed - direct).abs() < 1e-8, "{closed} vs {direct}");
}

#[test]
fn rate_gains_one_bit_per_doubling() {
    let g = Geometry::new(5.0, 2.0, 3).unwrap();
    let model = ChebyshevModel::new(&g, 10).unwrap();
    let alloc = default_allocation(3).unwrap();
    for snr in [40.0, 50.0] {
        let rho = db_to_linear(snr);
        let step = ergodic_high_snr(&model, &alloc, 2.0 * rho).unwrap()
            - ergodic_high_snr(&model, &alloc, rho).unwrap();
        assert!((step - 1.0).abs() < 0.1, "snr={snr}: {step}");
    }
}

#[test]
fn composition_weights_reproduce_cdf_power() {
    // sum_k multinom * prod (b_n e^{-c_n y})^{k_n} / R^M = F(y)^M.
    let g = Geometry::new(5.0, 3.0, 3).unwrap();
    let model = ChebyshevModel::new(&g, 4).unwrap();
    let y = 0.3;
    let total: f64 = enumerate_compositions(3, 4, false)
        .unwrap()
        .map(|k| {
            let decay: f64 =
                k.k.iter()
                    .zip(model.c())
                    .map(|(&kn, c)| -(kn as f64) * c * y)
                    .sum();
            composition_weight(&model, &k.k).unwrap() * decay.exp()
        })
        .sum();
    assert!((total - model.cdf(y).powi(3)).abs() < 1e-12);
}

#[test]
fn log_domain_weights_match_direct_products() {
    let g = Geometry::new(5.0, 2.0, 4).unwrap();
    let model = ChebyshevModel::new(&g, 3).unwrap();
    for k in enumerate_compositions(4, 3, false).unwrap() {
        let a = composition_weight(&model, &k.k).unwrap();
        let b = composition_weight_direct(&model, &k.k);
        assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{:?}", k.k);
    }
}

#[test]
fn multinomial_counts_are_exact() {
    assert_eq!(log_multinomial(4, &[2, 1, 1]).unwrap().exp().round(), 12.0);
    assert_eq!(log_multinomial(6, &[3, 3]).unwrap().exp().round(), 20.0);
    assert_eq!(composition_count(4, 3), 35);
    assert_eq!(enumerate_compositions(4, 3, true).unwrap().count(), 34);
}

#[test]
fn composition_cap_is_enforced() {
    let g = Geometry::new(5.0, 2.0, 50).unwrap();
    let model = ChebyshevModel::new(&g, 10).unwrap();
    let alloc = default_allocation(50).unwrap();
    assert!(matches!(
        ergodic_high_snr(&model, &alloc, 1e3),
        Err(Error::TooManyCompositions { .. })
    ));
}

#[test]
fn growth_function_tends_to_its_limit() {
    let g = Geometry::new(5.0, 2.0, 1).unwrap();
    let model = ChebyshevModel::new(&g, 10).unwrap();
    let limit = growth_limit(&model).unwrap();
    let ratio = growth_function(&model, 40.0) / limit;
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
    let direct = model.survival(40.0) / model.pdf(40.0);
    assert!((growth_function(&model, 40.0) - direct).abs() < 1e-9 * direct);
}
