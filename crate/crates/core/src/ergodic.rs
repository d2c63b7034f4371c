//! Ergodic sum rate: every user is served at its instantaneous
//! achievable rate.
//!
//! At high SNR the weak users' rates saturate at `log2(1 + a_m / ã_m)` and
//! only the strongest user's term
//! `T1 = E[log2(1 + rho a_M |h_M|^2)]` grows with rho. Writing
//! `F(x)^M = R_D^{-M} sum_k multinom(M; k) prod b_n^{k_n} exp(-x sum k_n c_n)`
//! gives `T1` in closed form as a signed sum of `e^z E1(z)` terms, where
//! `e^z E1(z) = e^{z/2} z^{-1/2} W_{-1/2,0}(z)`.

use serde::Serialize;

use crate::chebyshev::ChebyshevModel;
use crate::error::{domain, Error, Result};
use crate::montecarlo::EstimatorResult;
use crate::noma::PowerAllocation;
use crate::numerics::{binomial, exp_e1_scaled, find_root, ln_factorial, CompensatedSum};

/// Upper bound on the number of compositions enumerated.
pub const COMPOSITION_CAP: u128 = 10_000_000;

/// A composition (k_0, ..., k_N) of M into N + 1 nonnegative parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Composition {
    pub k: Vec<u32>,
}

impl Composition {
    pub fn total(&self) -> u64 {
        self.k.iter().map(|&v| u64::from(v)).sum()
    }
}

/// Compositions in descending lexicographic order, starting at (M, 0, ..., 0).
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let last = next.len() - 1;
        let tail = next[last];
        next[last] = 0;
        if let Some(i) = (0..last).rev().find(|&i| next[i] > 0) {
            next[i] -= 1;
            next[i + 1] = tail + 1;
            self.current = Some(next);
        }
        Some(Composition { k: cur })
    }
}

/// Number of compositions of `m_users` into `order_n + 1` parts,
/// `C(M + N, N)`.
pub fn composition_count(m_users: usize, order_n: usize) -> u128 {
    let (n, k) = ((m_users + order_n) as u128, order_n.min(m_users) as u128);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Enumerates every composition of `m_users` into `order_n + 1` parts. With
/// `exclude_all_k0` the leading (M, 0, ..., 0) term is skipped.
pub fn enumerate_compositions(
    m_users: usize,
    order_n: usize,
    exclude_all_k0: bool,
) -> Result<Compositions> {
    if m_users < 1 || order_n < 1 {
        return domain("compositions need M >= 1 and N >= 1");
    }
    let count = composition_count(m_users, order_n);
    if count > COMPOSITION_CAP {
        return Err(Error::TooManyCompositions {
            count,
            cap: COMPOSITION_CAP,
        });
    }
    let mut first = vec![0u32; order_n + 1];
    first[0] = m_users as u32;
    let mut it = Compositions {
        current: Some(first),
    };
    if exclude_all_k0 {
        it.next();
    }
    Ok(it)
}

/// `e^{z/2} z^{-1/2} W_{-1/2,0}(z)`, evaluated as `e^z E1(z)`.
pub fn whittaker_term(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("Whittaker argument must be positive, got {z}"));
    }
    exp_e1_scaled(z)
}

/// `ln |prod b_n^{k_n}|` and its sign.
pub fn signed_log_product(b: &[f64], k: &[u32]) -> (f64, f64) {
    let mut ln_mag = 0.0;
    let mut negative = false;
    for (&bn, &kn) in b.iter().zip(k) {
        if kn == 0 {
            continue;
        }
        ln_mag += f64::from(kn) * bn.abs().ln();
        if bn < 0.0 && kn % 2 == 1 {
            negative = !negative;
        }
    }
    (ln_mag, if negative { -1.0 } else { 1.0 })
}

/// Coefficient of `exp(-x sum k_n c_n)` in `F(x)^M`:
/// `multinom(M; k) prod b_n^{k_n} / R_D^M`.
pub fn composition_weight(model: &ChebyshevModel, k: &[u32]) -> Result<f64> {
    if k.len() != model.order() + 1 {
        return domain("composition length must be N + 1");
    }
    let m: u64 = k.iter().map(|&v| u64::from(v)).sum();
    let ln_multi = crate::numerics::log_multinomial(m, k)?;
    let (ln_prod, sign) = signed_log_product(model.b(), k);
    Ok(sign * (ln_multi + ln_prod - m as f64 * model.radius().ln()).exp())
}

/// High-SNR ergodic sum rate in bits per channel use.
pub fn ergodic_high_snr(model: &ChebyshevModel, alloc: &PowerAllocation, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return domain("rho must be positive");
    }
    let m_users = alloc.users();
    let saturated: f64 = (1..m_users)
        .map(|m| (alloc.coeff(m) / alloc.interference(m)).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2;

    let scale = rho * alloc.coeff(m_users);
    let ln_fact: Vec<f64> = (0..=m_users as u64).map(ln_factorial).collect();
    let ln_abs_b: Vec<f64> = model.b().iter().map(|b| b.abs().ln()).collect();
    let c = model.c();
    let base = ln_fact[m_users] - m_users as f64 * model.radius().ln();

    let mut acc = CompensatedSum::new();
    for comp in enumerate_compositions(m_users, model.order(), true)? {
        let mut ln_mag = base;
        let mut exponent = 0.0;
        let mut negative = false;
        for (n, &kn) in comp.k.iter().enumerate() {
            if kn == 0 {
                continue;
            }
            let kf = f64::from(kn);
            ln_mag += kf * ln_abs_b[n] - ln_fact[kn as usize];
            exponent += kf * c[n];
            if model.b()[n] < 0.0 && kn % 2 == 1 {
                negative = !negative;
            }
        }
        let w = whittaker_term(exponent / scale)?;
        let term = ln_mag.exp() * w;
        acc.add(if negative { -term } else { term });
    }
    Ok(saturated - acc.value() / std::f64::consts::LN_2)
}

/// Growth function `(1 - F(x)) / f(x)`.
pub fn growth_function(model: &ChebyshevModel, x: f64) -> f64 {
    model.survival_approx(x) / model.pdf_approx(x.max(0.0)).unwrap_or(f64::NAN)
}

/// `lim_{x->inf} G(x) = -b_N / beta_N` where N is the node with the
/// smallest exponent.
pub fn growth_limit(model: &ChebyshevModel) -> Result<f64> {
    let n = model.order();
    if model.slowest_node() != n {
        return domain("the last Chebyshev node does not carry the smallest exponent");
    }
    Ok(-model.b()[n] / model.beta()[n])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UmSolution {
    /// Root of `1 - F(u) = 1/M`.
    pub root: f64,
    /// Leading-order prediction `ln(M) / c_N`.
    pub leading_order: f64,
}

/// Solves `1 - F(u_M) = 1/M` by bracketing and bisection.
pub fn solve_u_m(model: &ChebyshevModel, m_users: u64) -> Result<UmSolution> {
    if m_users < 2 {
        return domain("u_M needs M >= 2");
    }
    let target = 1.0 / m_users as f64;
    let f = |u: f64| model.survival_approx(u) - target;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::NoSignChange { lo: 0.0, hi });
        }
    }
    let root = find_root(f, 0.0, hi, 1e-10)?;
    let c_min = model.c()[model.slowest_node()];
    Ok(UmSolution {
        root,
        leading_order: (m_users as f64).ln() / c_min,
    })
}

/// Large-M sum rate `log2(rho ln ln M)`. Needs M >= 16 so that
/// `ln ln M > 1`.
pub fn asymptotic_sum_rate(rho: f64, m_users: u64) -> Result<f64> {
    if !(rho > 0.0) {
        return domain("rho must be positive");
    }
    if m_users < 16 {
        return domain(format!("asymptote needs M >= 16, got {m_users}"));
    }
    Ok((rho * (m_users as f64).ln().ln()).log2())
}

/// Ergodic-rate summary for one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub high_snr_rate: f64,
    pub empirical_rate: EstimatorResult,
    pub asymptote: Option<f64>,
    pub baseline_random: EstimatorResult,
    pub baseline_opportunistic: EstimatorResult,
}

/// Exact weight of a composition computed with integer factorials and a
/// direct product. Only for small M and N.
#[doc(hidden)]
pub fn composition_weight_direct(model: &ChebyshevModel, k: &[u32]) -> f64 {
    let m: u64 = k.iter().map(|&v| u64::from(v)).sum();
    let mut multi = 1.0;
    let mut left = m;
    for &kn in k {
        multi *= binomial(left, u64::from(kn));
        left -= u64::from(kn);
    }
    let prod: f64 = model
        .b()
        .iter()
        .zip(k)
        .map(|(b, &kn)| b.powi(kn as i32))
        .product();
    multi * prod / model.radius().powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Geometry;

    fn model(r: f64, a: f64, n: usize) -> ChebyshevModel {
        ChebyshevModel::new(&Geometry::new(r, a, 1).unwrap(), n).unwrap()
    }

    #[test]
    fn composition_counts() {
        assert_eq!(enumerate_compositions(2, 2, false).unwrap().count(), 6);
        let small: Vec<Vec<u32>> = enumerate_compositions(1, 1, false)
            .unwrap()
            .map(|c| c.k)
            .collect();
        assert_eq!(small, vec![vec![1, 0], vec![0, 1]]);
        for (m, n) in [(1, 1), (3, 4), (5, 2), (4, 10)] {
            let all = enumerate_compositions(m, n, false).unwrap().count() as u128;
            let ex = enumerate_compositions(m, n, true).unwrap().count() as u128;
            assert_eq!(all, composition_count(m, n));
            assert_eq!(ex, all - 1);
        }
        assert_eq!(composition_count(10, 10) - 1, 184_755);
    }

    #[test]
    fn compositions_are_distinct_and_valid() {
        let comps: Vec<Composition> = enumerate_compositions(4, 3, false).unwrap().collect();
        let set: std::collections::HashSet<_> = comps.iter().cloned().collect();
        assert_eq!(set.len(), comps.len());
        assert!(comps.iter().all(|c| c.total() == 4));
        assert!(comps.windows(2).all(|w| w[0].k > w[1].k));
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_compositions(30, 30, true),
            Err(Error::TooManyCompositions { .. })
        ));
    }

    #[test]
    fn excluded_term_is_one() {
        let m = model(5.0, 2.0, 10);
        for users in 1..=6u32 {
            let mut k = vec![0u32; 11];
            k[0] = users;
            let w = composition_weight(&m, &k).unwrap();
            assert!((w - 1.0).abs() < 1e-12, "M={users}: {w}");
        }
    }

    #[test]
    fn weights_sum_to_cdf_power() {
        // sum over all compositions of weight * exp(-x sum k c) = F(x)^M
        let m = model(5.0, 3.0, 4);
        let x = 0.07;
        let total: f64 = enumerate_compositions(3, 4, false)
            .unwrap()
            .map(|comp| {
                let s: f64 = comp
                    .k
                    .iter()
                    .zip(m.c())
                    .map(|(&k, c)| f64::from(k) * c)
                    .sum();
                composition_weight(&m, &comp.k).unwrap() * (-x * s).exp()
            })
            .sum();
        assert!((total - m.cdf_approx(x).unwrap().powi(3)).abs() < 1e-13);
    }

    #[test]
    fn log_domain_product_matches_direct() {
        let m = model(5.0, 2.0, 3);
        for comp in enumerate_compositions(2, 3, false).unwrap() {
            let a = composition_weight(&m, &comp.k).unwrap();
            let b = composition_weight_direct(&m, &comp.k);
            assert!((a - b).abs() <= 1e-12 * b.abs(), "{:?}: {a} vs {b}", comp.k);
        }
    }

    #[test]
    fn whittaker_limits() {
        assert!(whittaker_term(1e4).unwrap() < 2e-4);
        assert!(whittaker_term(1e-6).unwrap() > 12.0);
        assert!(whittaker_term(0.0).is_err());
        for z in [1.5, 3.0, 10.0, 100.0] {
            let w = whittaker_term(z).unwrap();
            assert!(w > 0.0 && w < 1.0 / z);
        }
    }

    #[test]
    fn saturated_part_for_two_users() {
        let m = model(5.0, 2.0, 10);
        let alloc = PowerAllocation::new(vec![0.8, 0.2]).unwrap();
        // rate minus the single-user T1 term isolates log2(1 + a_1/a_2)
        let two = ergodic_high_snr(&m, &alloc, 1e3).unwrap();
        assert!(two > 5f64.log2());
    }

    #[test]
    fn growth_limit_forms_agree() {
        let m = model(5.0, 2.0, 10);
        let g = growth_limit(&m).unwrap();
        assert!((g - 1.0 / m.c()[10]).abs() < 1e-14);
        let single = model(2.0, 2.0, 1);
        assert!((growth_limit(&single).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn u_m_for_two_users_is_median() {
        let m = model(5.0, 2.0, 10);
        let s = solve_u_m(&m, 2).unwrap();
        assert!((m.cdf_approx(s.root).unwrap() - 0.5).abs() < 1e-8);
        assert!(solve_u_m(&m, 1).is_err());
        let roots: Vec<f64> = [2, 5, 10, 100, 1000]
            .iter()
            .map(|&k| solve_u_m(&m, k).unwrap().root)
            .collect();
        assert!(roots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn asymptote_basics() {
        let m = 1000u64;
        let rho = 1.0 / (m as f64).ln().ln();
        assert!(asymptotic_sum_rate(rho, m).unwrap().abs() < 1e-14);
        let r1 = asymptotic_sum_rate(2.0, 100).unwrap();
        let r2 = asymptotic_sum_rate(4.0, 100).unwrap();
        assert!((r2 - r1 - 1.0).abs() < 1e-14);
        assert!(asymptotic_sum_rate(2.0, 15).is_err());
        assert!(asymptotic_sum_rate(2.0, 16).is_ok());
    }
}
