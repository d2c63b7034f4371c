use noma_core::channel::GainDistribution;
use noma_core::noma::{default_allocation, feasibility, psi_star_per_user, rate_j_to_m, sum_rate};
use noma_core::numerics::{exp_e1_scaled, CompensatedSum};
use noma_core::{ChannelDraw, ChebyshevModel, Geometry, PowerAllocation, RateTargets};
use proptest::prelude::*;

fn allocation(raw: Vec<f64>) -> PowerAllocation {
    let mut a = raw;
    a.sort_by(|x, y| y.total_cmp(x));
    let s: f64 = a.iter().sum();
    a.iter_mut().for_each(|x| *x /= s);
    let fix = 1.0 - a.iter().sum::<f64>();
    a[0] += fix;
    PowerAllocation::new(a).unwrap()
}

proptest! {
    #[test]
    fn stronger_gain_decodes_faster(g1 in 0.0..10.0f64, dg in 0.0..10.0f64, rho in 1.0..1e6f64, users in 1usize..6) {
        let alloc = default_allocation(users).unwrap();
        for j in 1..=users {
            prop_assert!(rate_j_to_m(g1 + dg, rho, &alloc, j) >= rate_j_to_m(g1, rho, &alloc, j));
        }
    }

    #[test]
    fn thresholds_scale_inversely_with_snr(
        raw in prop::collection::vec(0.05..1.0f64, 3),
        targets in prop::collection::vec(0.01..0.5f64, 3),
        rho in 1.0..1e5f64,
    ) {
        let alloc = allocation(raw);
        let t = RateTargets::new(targets).unwrap();
        let feasible = feasibility(&alloc, &t).unwrap();
        let a = psi_star_per_user(&alloc, &t, rho).unwrap();
        let b = psi_star_per_user(&alloc, &t, 10.0 * rho).unwrap();
        for m in 0..3 {
            prop_assert_eq!(a[m].is_some(), feasible[..=m].iter().all(|&f| f));
            if let (Some(x), Some(y)) = (a[m], b[m]) {
                prop_assert!((x / y - 10.0).abs() < 1e-9);
            }
        }
        // Running maximum.
        if let (Some(x), Some(y)) = (a[0], a[1]) {
            prop_assert!(y >= x);
        }
    }

    #[test]
    fn draws_are_sorted_permutations(raw in prop::collection::vec(0.0..100.0f64, 1..12)) {
        let draw = ChannelDraw::from_raw(raw.clone(), 0).unwrap();
        let mut expected = raw;
        expected.sort_by(f64::total_cmp);
        prop_assert_eq!(draw.gains(), expected.as_slice());
    }

    #[test]
    fn sum_rate_is_bounded_by_telescoped_ceiling(
        raw in prop::collection::vec(0.0..5.0f64, 4),
        rho in 1.0..1e6f64,
    ) {
        let alloc = default_allocation(4).unwrap();
        let draw = ChannelDraw::from_raw(raw, 0).unwrap();
        let g = draw.gains();
        let r = sum_rate(g, rho, &alloc);
        prop_assert!(r >= 0.0);
        prop_assert!(r <= (1.0 / alloc.coeff(4) + rho * g[3]).log2() + 1e-12);
    }

    #[test]
    fn whittaker_term_bounds(z in 1e-6..1e4f64) {
        let w = exp_e1_scaled(z).unwrap();
        prop_assert!(w > 1.0 / (z + 1.0) * 0.999_999_999);
        prop_assert!(w <= 1.0 / z);
        prop_assert!(exp_e1_scaled(z * 1.5).unwrap() < w);
    }

    #[test]
    fn compensated_sum_is_exact_on_integers(xs in prop::collection::vec(-1_000_000i64..1_000_000, 0..200)) {
        let s: CompensatedSum = xs.iter().map(|&x| x as f64).collect();
        prop_assert_eq!(s.value(), xs.iter().sum::<i64>() as f64);
    }

    #[test]
    fn chebyshev_cdf_stays_in_unit_interval(r in 1.0..20.0f64, alpha in 2.0..5.0f64, y in 0.0..100.0f64) {
        let model = ChebyshevModel::new(&Geometry::new(r, alpha, 1).unwrap(), 10).unwrap();
        let f = model.cdf(y);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f), "F={}", f);
        prop_assert!(model.pdf(y) >= 0.0);
    }
}
