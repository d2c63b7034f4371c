//! Power allocation, SIC decoding rates and the outage thresholds.
//!
//! Users are numbered 1..=M from weakest to strongest channel. User m first
//! decodes and cancels the messages of users 1..m-1 and treats the messages
//! of users m+1..M as noise. Noise power is normalized to one, so the transmit
//! SNR rho equals the transmit power.
//!
//! All functions that take a user number use that 1-based numbering.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelDraw;
use crate::error::{domain, Error, Result};

const ALLOC_SUM_TOL: f64 = 1e-12;

/// Power allocation coefficients a_1 >= a_2 >= ... >= a_M > 0, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    coeffs: Vec<f64>,
    // tail[j] = sum_{i > j} a_i (0-based j)
    #[serde(skip)]
    tail: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("power allocation needs at least one coefficient");
        }
        if coeffs.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return domain("power coefficients must be positive");
        }
        if coeffs.windows(2).any(|w| w[0] < w[1]) {
            return domain("power coefficients must be nonincreasing (weak users get more power)");
        }
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > ALLOC_SUM_TOL {
            return domain(format!("power coefficients sum to {sum}, expected 1"));
        }
        let tail = tail_sums(&coeffs);
        Ok(Self { coeffs, tail })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn users(&self) -> usize {
        self.coeffs.len()
    }

    /// a_j for user j.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs[j - 1]
    }

    /// sum_{i > j} a_i, written ã_j.
    pub fn interference(&self, j: usize) -> f64 {
        self.tail[j - 1]
    }
}

fn tail_sums(coeffs: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; coeffs.len()];
    let mut acc = 0.0;
    for j in (0..coeffs.len()).rev() {
        tail[j] = acc;
        acc += coeffs[j];
    }
    tail
}

/// Default coefficients: (4/5, 1/5) for two users, otherwise a_m ∝ M - m + 1.
pub fn default_allocation(users: usize) -> Result<PowerAllocation> {
    let coeffs = match users {
        0 => return domain("at least one user is required"),
        1 => vec![1.0],
        2 => vec![0.8, 0.2],
        m => {
            let mu = (m * (m + 1) / 2) as f64;
            (1..=m).map(|k| (m - k + 1) as f64 / mu).collect()
        }
    };
    PowerAllocation::new(coeffs)
}

/// Per-user target rates in bits per channel use and the matching SINR
/// thresholds phi_j = 2^{R_j} - 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTargets {
    targets: Vec<f64>,
    phi: Vec<f64>,
}

impl RateTargets {
    pub fn new(targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return domain("at least one target rate is required");
        }
        if targets.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return domain("target rates must be positive");
        }
        let phi = targets.iter().map(|r| r.exp2() - 1.0).collect();
        Ok(Self { targets, phi })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn users(&self) -> usize {
        self.targets.len()
    }

    pub fn total(&self) -> f64 {
        self.targets.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    pub rates: Vec<f64>,
}

impl RateVector {
    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Rate at which a receiver with gain `gain` can decode user j's message.
pub fn rate_j_to_m(gain: f64, rho: f64, alloc: &PowerAllocation, j: usize) -> f64 {
    let snr = rho * gain;
    let sinr = snr * alloc.coeff(j) / (snr * alloc.interference(j) + 1.0);
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// Adaptive rates: each user's own-message rate at its own gain. SIC always
/// succeeds because gains are sorted.
pub fn achievable_rates(
    draw: &ChannelDraw,
    rho: f64,
    alloc: &PowerAllocation,
) -> Result<RateVector> {
    if draw.users() != alloc.users() {
        return domain("draw and allocation disagree on the number of users");
    }
    let rates = draw
        .gains()
        .iter()
        .enumerate()
        .map(|(i, &g)| rate_j_to_m(g, rho, alloc, i + 1))
        .collect();
    Ok(RateVector { rates })
}

/// Sum of [`achievable_rates`] without allocating.
pub fn sum_rate(gains: &[f64], rho: f64, alloc: &PowerAllocation) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(i, &g)| rate_j_to_m(g, rho, alloc, i + 1))
        .sum()
}

fn check_lengths(alloc: &PowerAllocation, targets: &RateTargets) -> Result<()> {
    if alloc.users() != targets.users() {
        return domain(format!(
            "allocation has {} users but targets have {}",
            alloc.users(),
            targets.users()
        ));
    }
    Ok(())
}

/// Whether a_j > phi_j * ã_j holds for each user. Equality is infeasible.
pub fn feasibility(alloc: &PowerAllocation, targets: &RateTargets) -> Result<Vec<bool>> {
    check_lengths(alloc, targets)?;
    Ok((1..=alloc.users())
        .map(|j| alloc.coeff(j) - targets.phi()[j - 1] * alloc.interference(j) > 0.0)
        .collect())
}

/// Gain thresholds psi_j and their running maxima psi*_m.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub psi: Vec<f64>,
    pub psi_star: Vec<f64>,
}

/// psi_j = phi_j / (rho (a_j - phi_j ã_j)); fails on the first infeasible user.
pub fn psi_thresholds(
    alloc: &PowerAllocation,
    targets: &RateTargets,
    rho: f64,
) -> Result<Thresholds> {
    if !(rho > 0.0) {
        return domain("rho must be positive");
    }
    let feasible = feasibility(alloc, targets)?;
    if let Some(j) = feasible.iter().position(|f| !f) {
        return Err(Error::Infeasible { user: j + 1 });
    }
    let psi: Vec<f64> = (1..=alloc.users())
        .map(|j| {
            let phi = targets.phi()[j - 1];
            phi / (rho * (alloc.coeff(j) - phi * alloc.interference(j)))
        })
        .collect();
    let psi_star = psi
        .iter()
        .scan(0.0f64, |acc, &p| {
            *acc = acc.max(p);
            Some(*acc)
        })
        .collect();
    Ok(Thresholds { psi, psi_star })
}

/// psi*_m per user, or `None` when some user j <= m is infeasible (that
/// user's outage probability is one).
pub fn psi_star_per_user(
    alloc: &PowerAllocation,
    targets: &RateTargets,
    rho: f64,
) -> Result<Vec<Option<f64>>> {
    if !(rho > 0.0) {
        return domain("rho must be positive");
    }
    let feasible = feasibility(alloc, targets)?;
    let mut out = Vec::with_capacity(alloc.users());
    let mut running = Some(0.0f64);
    for j in 1..=alloc.users() {
        running = match (running, feasible[j - 1]) {
            (Some(acc), true) => {
                let phi = targets.phi()[j - 1];
                let psi = phi / (rho * (alloc.coeff(j) - phi * alloc.interference(j)));
                Some(acc.max(psi))
            }
            _ => None,
        };
        out.push(running);
    }
    Ok(out)
}

/// Outage of user m from its sorted gain and psi*_m.
pub fn outage_by_threshold(gain_m: f64, psi_star_m: Option<f64>) -> bool {
    match psi_star_m {
        Some(t) => gain_m <= t,
        None => true,
    }
}

/// Outage of user m by checking every SIC stage j <= m directly.
pub fn outage_by_sinr(
    gain_m: f64,
    m: usize,
    rho: f64,
    alloc: &PowerAllocation,
    targets: &RateTargets,
) -> bool {
    (1..=m).any(|j| rate_j_to_m(gain_m, rho, alloc, j) < targets.targets()[j - 1])
}
