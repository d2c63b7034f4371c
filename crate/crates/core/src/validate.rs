//! Internal consistency checks run by `noma validate`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::{GainDistribution, Geometry};
use crate::chebyshev::{ChebyshevModel, DEFAULT_ORDER};
use crate::db_to_linear;
use crate::ergodic::ergodic_high_snr;
use crate::error::Result;
use crate::montecarlo::Simulation;
use crate::noma::{default_allocation, RateTargets};
use crate::numerics::{exp_e1_scaled, integrate_to_infinity, QuadratureSpec};
use crate::outage::{fit_diversity_order, outage_exact};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }

    fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance: hi,
            passed: (lo..=hi).contains(&measured),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub radius: f64,
    pub alpha: f64,
    pub order: usize,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    /// Added to b_0 before any check runs.
    pub corrupt_b0: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            radius: 5.0,
            alpha: 3.0,
            order: DEFAULT_ORDER,
            trials: 200_000,
            seed: 1,
            workers: 0,
            corrupt_b0: 0.0,
        }
    }
}

fn max_cdf_gap(model: &ChebyshevModel, geometry: &Geometry) -> f64 {
    let exact = geometry.exact();
    (0..=2000)
        .map(|i| {
            let y = 20.0 * (i as f64 / 2000.0).powi(2);
            (model.cdf(y) - exact.cdf(y)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn run_validation(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let geometry = Geometry::new(opts.radius, opts.alpha, 2)?;
    let mut model = ChebyshevModel::new(&geometry, opts.order)?;
    if opts.corrupt_b0 != 0.0 {
        model.corrupt_b0(opts.corrupt_b0);
    }
    let mut checks = Vec::new();

    let b_sum: f64 = model.b().iter().sum();
    checks.push(Check::new(
        "sum of b_n is zero",
        b_sum.abs(),
        1e-12 * opts.radius,
    ));

    let beta_gap = model
        .b()
        .iter()
        .zip(model.c())
        .zip(model.beta())
        .map(|((b, c), beta)| (beta + b * c).abs() / (b * c).abs().max(1.0))
        .fold(0.0, f64::max);
    checks.push(Check::new("beta_n = -b_n c_n", beta_gap, 1e-12));

    checks.push(Check::new(
        "cdf vs exact, y in [0, 20]",
        max_cdf_gap(&model, &geometry),
        2e-3,
    ));

    let spec = QuadratureSpec::default();
    let pdf_mass = integrate_to_infinity(|y| model.pdf(y), 0.0, &spec)?;
    checks.push(Check::new(
        "pdf integrates to one",
        (pdf_mass - 1.0).abs(),
        1e-3,
    ));

    let whittaker_gap = [0.01, 0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&z| -> Result<f64> {
            let direct = integrate_to_infinity(|t| (-z * t).exp() / (1.0 + t), 0.0, &spec)?;
            Ok((exp_e1_scaled(z)? - direct).abs() / direct)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "Whittaker term vs integral",
        whittaker_gap,
        1e-8,
    ));

    let alloc = default_allocation(2)?;
    let targets = RateTargets::new(vec![0.1, 0.5])?;
    let rho = db_to_linear(20.0);
    let sim = Simulation::new(geometry, alloc.clone(), rho)?
        .with_targets(targets.clone())?
        .with_trials(opts.trials)?
        .with_seed(opts.seed)
        .with_workers(opts.workers);
    let empirical = sim.estimate_outage_all()?;
    let mut est_gap = 0.0f64;
    let mut ana_gap = 0.0f64;
    for m in 1..=2 {
        let (thr, sinr) = empirical[m - 1];
        let diff = (thr.mean - sinr.mean).abs();
        est_gap = est_gap.max(diff - 3.0 * thr.ci95_halfwidth.max(sinr.ci95_halfwidth));
        let p = outage_exact(&model, &alloc, &targets, rho, m)?.probability;
        ana_gap = ana_gap.max((p - thr.mean).abs() - 3.0 * thr.ci95_halfwidth);
    }
    checks.push(Check::new(
        "threshold vs SINR estimator, 20 dB (excess over 3 CI)",
        est_gap.max(0.0),
        0.0,
    ));
    checks.push(Check::new(
        "analytic vs simulated outage, 20 dB (excess over 3 CI)",
        ana_gap.max(0.0),
        2e-3,
    ));

    for (m, lo, hi) in [(1, 0.7, 1.3), (2, 1.7, 2.3)] {
        let curve = [30.0, 40.0, 50.0, 60.0]
            .iter()
            .map(|&db| -> Result<(f64, f64)> {
                let r = db_to_linear(db);
                Ok((r, outage_exact(&model, &alloc, &targets, r, m)?.probability))
            })
            .collect::<Result<Vec<_>>>()?;
        let slope = fit_diversity_order(&curve).unwrap_or(f64::NAN);
        checks.push(Check::within(
            &format!("diversity order, M=2 user {m}"),
            slope,
            lo,
            hi,
        ));
    }

    let rho = db_to_linear(40.0);
    let sim = Simulation::new(geometry, alloc.clone(), rho)?
        .with_trials(opts.trials)?
        .with_seed(opts.seed.wrapping_add(1))
        .with_workers(opts.workers);
    let mc = sim.estimate_sum_rates()[0].mean;
    let closed = ergodic_high_snr(&model, &alloc, rho)?;
    checks.push(Check::new(
        "ergodic closed form vs simulation, 40 dB (relative)",
        ((closed - mc) / mc).abs(),
        0.05,
    ));

    Ok(checks)
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn format_table(checks: &[Check]) -> String {
    let width = checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!(
        "{:<width$}  {:>12}  {:>10}  result\n",
        "check", "measured", "tolerance"
    );
    for c in checks {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.3e}  {:>10.1e}  {}",
            c.name,
            c.measured,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}
