//! Outage analysis for users with fixed target rates.
//!
//! User m avoids outage iff its sorted gain exceeds psi*_m, so its outage
//! probability is the order-statistic CDF of the m-th weakest gain at psi*_m.

use serde::Serialize;

use crate::channel::{order_prefactor, order_statistic_pdf_unchecked, GainDistribution, Geometry};
use crate::chebyshev::ChebyshevModel;
use crate::error::{domain, Error, Result};
use crate::montecarlo::EstimatorResult;
use crate::noma::{psi_star_per_user, PowerAllocation, RateTargets};
use crate::numerics::{fit_line, integrate, QuadratureSpec};

/// An analytic outage value together with the feasibility of the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outage {
    pub probability: f64,
    pub feasible: bool,
}

impl Outage {
    fn forced() -> Self {
        Self {
            probability: 1.0,
            feasible: false,
        }
    }
}

/// Per-user outage summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageReport {
    pub user: usize,
    pub feasible: bool,
    /// Order-statistic integral on the Chebyshev distribution.
    pub analytic_exact: f64,
    /// Same integral on the quadrature-exact distribution.
    pub analytic_reference: f64,
    /// High-SNR closed form, capped at one.
    pub analytic_high_snr: f64,
    pub empirical: EstimatorResult,
    pub empirical_sinr: EstimatorResult,
    pub diversity_slope: Option<f64>,
}

fn outage_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-10,
        max_subdivisions: 100_000,
    }
}

fn check_user(m: usize, alloc: &PowerAllocation) -> Result<()> {
    if m < 1 || m > alloc.users() {
        return domain(format!("user {m} outside 1..={}", alloc.users()));
    }
    Ok(())
}

/// Integral of the m-th order-statistic density over `[0, psi_star]`.
pub fn order_statistic_integral<D: GainDistribution + ?Sized>(
    dist: &D,
    m: usize,
    total: usize,
    psi_star: f64,
) -> Result<f64> {
    if psi_star <= 0.0 {
        return Ok(0.0);
    }
    let p = integrate(
        |x| order_statistic_pdf_unchecked(x, m, total, dist),
        0.0,
        psi_star,
        &outage_quadrature(),
    )?;
    Ok(p)
}

fn outage_with<D: GainDistribution + ?Sized>(
    dist: &D,
    alloc: &PowerAllocation,
    targets: &RateTargets,
    rho: f64,
    m: usize,
) -> Result<Outage> {
    check_user(m, alloc)?;
    match psi_star_per_user(alloc, targets, rho)?[m - 1] {
        None => Ok(Outage::forced()),
        Some(psi_star) => Ok(Outage {
            probability: order_statistic_integral(dist, m, alloc.users(), psi_star)?,
            feasible: true,
        }),
    }
}

/// Outage of user m by integrating the order-statistic density built on the
/// Chebyshev CDF/pdf.
pub fn outage_exact(
    model: &ChebyshevModel,
    alloc: &PowerAllocation,
    targets: &RateTargets,
    rho: f64,
    m: usize,
) -> Result<Outage> {
    outage_with(model, alloc, targets, rho, m)
}

/// Same integral on the quadrature-exact gain distribution; isolates the
/// Chebyshev approximation error.
pub fn outage_reference(
    geometry: &Geometry,
    alloc: &PowerAllocation,
    targets: &RateTargets,
    rho: f64,
    m: usize,
) -> Result<Outage> {
    outage_with(&geometry.exact(), alloc, targets, rho, m)
}

/// High-SNR form `(tau_m / m) * eta^m * (psi*_m)^m`. Not capped at one.
pub fn outage_high_snr(
    model: &ChebyshevModel,
    alloc: &PowerAllocation,
    targets: &RateTargets,
    rho: f64,
    m: usize,
) -> Result<Outage> {
    check_user(m, alloc)?;
    match psi_star_per_user(alloc, targets, rho)?[m - 1] {
        None => Ok(Outage::forced()),
        Some(psi_star) => {
            let tau = order_prefactor(m, alloc.users());
            let mi = m as i32;
            Ok(Outage {
                probability: tau / m as f64 * model.eta().powi(mi) * psi_star.powi(mi),
                feasible: true,
            })
        }
    }
}

/// Diversity order: minus the least-squares slope of log10 P against
/// log10 rho.
pub fn fit_diversity_order(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::Fit("need at least three points".into()));
    }
    if curve.iter().any(|&(rho, _)| !(rho > 0.0)) {
        return Err(Error::Fit("rho values must be positive".into()));
    }
    if let Some(&(_, p)) = curve.iter().find(|&&(_, p)| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Fit(format!(
            "probability {p} outside (0, 1); the log-log slope is undefined or saturated"
        )));
    }
    let (lo, hi) = curve
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(r, _)| {
            (lo.min(r), hi.max(r))
        });
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Fit("rho values must span at least 20 dB".into()));
    }
    let xs: Vec<f64> = curve.iter().map(|&(r, _)| r.log10()).collect();
    let ys: Vec<f64> = curve.iter().map(|&(_, p)| p.log10()).collect();
    Ok(-fit_line(&xs, &ys)?.slope)
}

/// Keeps the points whose probability lies in `[1e-6, 0.1]`, the range where
/// simulated curves are neither saturated nor noise-dominated.
pub fn diversity_fit_window(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    curve
        .iter()
        .copied()
        .filter(|&(_, p)| (1e-6..=0.1).contains(&p))
        .collect()
}
