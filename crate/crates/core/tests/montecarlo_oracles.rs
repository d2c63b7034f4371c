use noma_core::channel::fill_sorted_gains;
use noma_core::montecarlo::{derive_seed, trial_rng};
use noma_core::noma::{default_allocation, sum_rate};
use noma_core::outage::outage_reference;
use noma_core::{db_to_linear, Geometry, RateTargets, Scheme, Simulation};

fn sim(users: usize, alpha: f64, snr_db: f64) -> Simulation {
    let g = Geometry::new(5.0, alpha, users).unwrap();
    Simulation::new(g, default_allocation(users).unwrap(), db_to_linear(snr_db)).unwrap()
}

#[test]
fn confidence_intervals_cover_the_truth() {
    let g = Geometry::new(5.0, 3.0, 2).unwrap();
    let alloc = default_allocation(2).unwrap();
    let targets = RateTargets::new(vec![0.1, 0.5]).unwrap();
    let rho = db_to_linear(20.0);
    let truth = outage_reference(&g, &alloc, &targets, rho, 2)
        .unwrap()
        .probability;
    let base = Simulation::new(g, alloc, rho)
        .unwrap()
        .with_targets(targets)
        .unwrap()
        .with_trials(5_000)
        .unwrap();
    let covered = (0..100u64)
        .filter(|&r| {
            let e = base
                .clone()
                .with_seed(derive_seed(99, r))
                .estimate_outage(2)
                .unwrap();
            (e.mean - truth).abs() <= e.ci95_halfwidth
        })
        .count();
    assert!(covered >= 88, "covered {covered}/100");
}

#[test]
fn results_independent_of_worker_count() {
    let s = sim(3, 3.0, 25.0)
        .with_targets(RateTargets::new(vec![0.1, 0.3, 0.5]).unwrap())
        .unwrap()
        .with_trials(30_001)
        .unwrap()
        .with_seed(4);
    let reference = s.clone().with_workers(1);
    for workers in [0, 2, 8] {
        let other = s.clone().with_workers(workers);
        assert_eq!(
            reference.estimate_outage_all().unwrap(),
            other.estimate_outage_all().unwrap()
        );
        assert_eq!(reference.estimate_sum_rates(), other.estimate_sum_rates());
    }
}

#[test]
fn combined_pass_matches_individual_estimators() {
    let s = sim(2, 3.0, 20.0)
        .with_targets(RateTargets::new(vec![0.1, 0.5]).unwrap())
        .unwrap()
        .with_trials(20_000)
        .unwrap()
        .with_seed(12);
    let all = s.estimate_outage_all().unwrap();
    for m in 1..=2 {
        assert_eq!(all[m - 1].0, s.estimate_outage(m).unwrap());
        assert_eq!(all[m - 1].1, s.estimate_outage_via_sinr(m).unwrap());
    }
    let rates = s.estimate_sum_rates();
    assert_eq!(rates[0], s.estimate_sum_rate(Scheme::Noma).unwrap());
    assert_eq!(
        rates[2],
        s.estimate_sum_rate(Scheme::Opportunistic).unwrap()
    );
}

#[test]
fn opportunistic_dominates_every_draw() {
    let g = Geometry::new(5.0, 2.0, 5).unwrap();
    let alloc = default_allocation(5).unwrap();
    let rho = db_to_linear(30.0);
    let mut gains = [0.0; 5];
    for i in 0..10_000 {
        fill_sorted_gains(&mut trial_rng(17, i), &g, &mut gains);
        for &x in &gains {
            assert!((1.0 + rho * gains[4]).log2() >= (1.0 + rho * x).log2());
        }
        // Interference-limited terms telescope to log2(1/a_M).
        let a_m = alloc.coeff(5);
        assert!(sum_rate(&gains, rho, &alloc) <= (1.0 / a_m + rho * gains[4]).log2() + 1e-12);
    }
}

#[test]
fn noma_beats_oma_at_high_snr() {
    for users in [2, 4] {
        let [noma, oma, opp] = sim(users, 2.0, 30.0)
            .with_trials(50_000)
            .unwrap()
            .estimate_sum_rates();
        assert!(noma.mean > oma.mean);
        assert!(opp.mean >= oma.mean);
    }
}

#[test]
fn seeds_change_results_and_replay() {
    let a = sim(2, 3.0, 20.0)
        .with_trials(10_000)
        .unwrap()
        .with_seed(1)
        .estimate_sum_rates();
    let b = sim(2, 3.0, 20.0)
        .with_trials(10_000)
        .unwrap()
        .with_seed(1)
        .estimate_sum_rates();
    let c = sim(2, 3.0, 20.0)
        .with_trials(10_000)
        .unwrap()
        .with_seed(2)
        .estimate_sum_rates();
    assert_eq!(a, b);
    assert_ne!(a[0].mean, c[0].mean);
}

#[test]
fn oma_split_divides_rates() {
    let base = sim(4, 3.0, 20.0).with_trials(10_000).unwrap().with_seed(6);
    let full = base.clone().estimate_sum_rate(Scheme::OmaRandom).unwrap();
    let split = base
        .with_oma_split(true)
        .estimate_sum_rate(Scheme::OmaRandom)
        .unwrap();
    assert!((split.mean * 4.0 - full.mean).abs() < 1e-9 * full.mean);
}
