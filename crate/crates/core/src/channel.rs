//! Disc deployment with Rayleigh fading and bounded path loss `1 + d^alpha`.
//!
//! A user at distance `d` from the base station sees the effective gain
//! `|g|^2 / (1 + d^alpha)` where `|g|^2` is unit-mean exponential. Users are
//! uniform over the disc area, so `d = R_D * sqrt(u)` for uniform `u`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{binomial, integrate, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    radius: f64,
    alpha: f64,
    users: usize,
}

impl Geometry {
    pub fn new(radius: f64, alpha: f64, users: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("disc radius must be positive, got {radius}"));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return domain(format!("path-loss exponent must be >= 1, got {alpha}"));
        }
        if users < 1 {
            return domain("at least one user is required");
        }
        Ok(Self {
            radius,
            alpha,
            users,
        })
    }

    /// Disc radius R_D in meters.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Same disc with a different user count.
    pub fn with_users(&self, users: usize) -> Result<Self> {
        Self::new(self.radius, self.alpha, users)
    }

    pub fn exact(&self) -> ExactGain {
        ExactGain { geometry: *self }
    }
}

/// Gain for a user at area fraction `u` (distance `R_D * sqrt(u)`) with
/// small-scale fading power `fading_power`.
pub fn gain_from_variates(u: f64, fading_power: f64, geometry: &Geometry) -> f64 {
    let d = geometry.radius * u.sqrt();
    fading_power / (1.0 + d.powf(geometry.alpha))
}

/// One unordered effective channel gain.
pub fn sample_unordered_gain<R: Rng + ?Sized>(rng: &mut R, geometry: &Geometry) -> f64 {
    let u: f64 = rng.random();
    let fading: f64 = Exp1.sample(rng);
    gain_from_variates(u, fading, geometry)
}

/// Fills `out` with independent gains and sorts them ascending.
pub fn fill_sorted_gains<R: Rng + ?Sized>(rng: &mut R, geometry: &Geometry, out: &mut [f64]) {
    for g in out.iter_mut() {
        *g = sample_unordered_gain(rng, geometry);
    }
    out.sort_by(f64::total_cmp);
}

/// One realization of all users' gains, sorted so that `gains[0]` is the
/// weakest user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    gains: Vec<f64>,
    seed_tag: u64,
}

impl ChannelDraw {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, geometry: &Geometry, seed_tag: u64) -> Self {
        let mut gains = vec![0.0; geometry.users];
        fill_sorted_gains(rng, geometry, &mut gains);
        Self { gains, seed_tag }
    }

    /// Builds a draw from raw (unsorted) gains.
    pub fn from_raw(mut gains: Vec<f64>, seed_tag: u64) -> Result<Self> {
        if gains.is_empty() {
            return domain("a draw needs at least one gain");
        }
        if gains.iter().any(|g| !(*g >= 0.0)) {
            return domain("gains must be nonnegative");
        }
        gains.sort_by(f64::total_cmp);
        Ok(Self { gains, seed_tag })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn seed_tag(&self) -> u64 {
        self.seed_tag
    }

    pub fn users(&self) -> usize {
        self.gains.len()
    }
}

/// Sampling from the RNG directly. The trial engine in
/// [`crate::montecarlo`] uses [`fill_sorted_gains`] to avoid allocating.
pub fn sample_channel_draw<R: Rng + ?Sized>(rng: &mut R, geometry: &Geometry) -> ChannelDraw {
    ChannelDraw::sample(rng, geometry, 0)
}

/// A CDF/pdf pair for the unordered channel gain.
pub trait GainDistribution {
    fn cdf(&self, y: f64) -> f64;
    fn pdf(&self, y: f64) -> f64;

    /// `1 - cdf(y)`; implementors override when they can avoid cancellation.
    fn survival(&self, y: f64) -> f64 {
        1.0 - self.cdf(y)
    }
}

fn exact_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-10,
        rel_tol: 1e-12,
        max_subdivisions: 1_000_000,
    }
}

/// CDF of the unordered gain, by adaptive quadrature over the distance.
pub fn cdf_exact(y: f64, geometry: &Geometry) -> Result<f64> {
    if !(y >= 0.0) {
        return domain(format!("cdf argument must be >= 0, got {y}"));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let (r, alpha) = (geometry.radius, geometry.alpha);
    let inner = integrate(
        |z| -(-(1.0 + z.powf(alpha)) * y).exp_m1() * z,
        0.0,
        r,
        &exact_quadrature(),
    )?;
    Ok((2.0 / (r * r) * inner).clamp(0.0, 1.0))
}

/// Density of the unordered gain, the y-derivative of [`cdf_exact`].
pub fn pdf_exact(y: f64, geometry: &Geometry) -> Result<f64> {
    if !(y >= 0.0) {
        return domain(format!("pdf argument must be >= 0, got {y}"));
    }
    let (r, alpha) = (geometry.radius, geometry.alpha);
    let inner = integrate(
        |z| {
            let c = 1.0 + z.powf(alpha);
            c * (-c * y).exp() * z
        },
        0.0,
        r,
        &exact_quadrature(),
    )?;
    Ok(2.0 / (r * r) * inner)
}

/// Exact (quadrature-backed) gain distribution for a geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactGain {
    geometry: Geometry,
}

impl GainDistribution for ExactGain {
    fn cdf(&self, y: f64) -> f64 {
        cdf_exact(y.max(0.0), &self.geometry).expect("exact cdf quadrature")
    }

    fn pdf(&self, y: f64) -> f64 {
        pdf_exact(y.max(0.0), &self.geometry).expect("exact pdf quadrature")
    }
}

fn check_order(m: usize, total: usize) -> Result<()> {
    if m < 1 || m > total {
        return domain(format!("order index m={m} outside 1..={total}"));
    }
    Ok(())
}

/// Density of the m-th smallest of `total` i.i.d. gains (m is 1-based).
pub fn order_statistic_pdf<D: GainDistribution + ?Sized>(
    x: f64,
    m: usize,
    total: usize,
    dist: &D,
) -> Result<f64> {
    check_order(m, total)?;
    Ok(order_statistic_pdf_unchecked(x, m, total, dist))
}

pub(crate) fn order_statistic_pdf_unchecked<D: GainDistribution + ?Sized>(
    x: f64,
    m: usize,
    total: usize,
    dist: &D,
) -> f64 {
    let f = dist.cdf(x);
    let s = dist.survival(x);
    let tau = order_prefactor(m, total);
    tau * f.powi(m as i32 - 1) * s.powi((total - m) as i32) * dist.pdf(x)
}

/// `M! / ((m-1)! (M-m)!)`.
pub fn order_prefactor(m: usize, total: usize) -> f64 {
    total as f64 * binomial(total as u64 - 1, m as u64 - 1)
}

/// CDF of the m-th smallest of `total` i.i.d. gains via the binomial sum
/// `sum_{k=m}^{M} C(M,k) F^k (1-F)^{M-k}`.
pub fn order_statistic_cdf<D: GainDistribution + ?Sized>(
    x: f64,
    m: usize,
    total: usize,
    dist: &D,
) -> Result<f64> {
    check_order(m, total)?;
    let f = dist.cdf(x);
    let s = dist.survival(x);
    Ok(binomial_tail(f, s, m, total))
}

pub(crate) fn binomial_tail(f: f64, s: f64, m: usize, total: usize) -> f64 {
    (m..=total)
        .map(|k| binomial(total as u64, k as u64) * f.powi(k as i32) * s.powi((total - k) as i32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gain_at_center_and_edge() {
        let g = Geometry::new(1.0, 2.0, 1).unwrap();
        assert_eq!(gain_from_variates(0.0, 1.0, &g), 1.0);
        assert_eq!(gain_from_variates(1.0, 2.0, &g), 1.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(Geometry::new(0.0, 2.0, 1).is_err());
        assert!(Geometry::new(5.0, 0.5, 1).is_err());
        assert!(Geometry::new(5.0, 2.0, 0).is_err());
        assert!(Geometry::new(5.0, f64::NAN, 1).is_err());
    }

    #[test]
    fn draw_sorting() {
        let d = ChannelDraw::from_raw(vec![0.3, 0.1], 7).unwrap();
        assert_eq!(d.gains(), &[0.1, 0.3]);
        assert_eq!(d.seed_tag(), 7);
        let single = ChannelDraw::from_raw(vec![0.4], 0).unwrap();
        assert_eq!(single.gains(), &[0.4]);
        assert!(ChannelDraw::from_raw(vec![-1.0], 0).is_err());
    }

    #[test]
    fn sampled_draw_is_sorted_and_nonnegative() {
        let g = Geometry::new(5.0, 3.0, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = sample_channel_draw(&mut rng, &g);
            assert_eq!(d.users(), 6);
            assert!(d.gains().windows(2).all(|w| w[0] <= w[1]));
            assert!(d.gains().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn cdf_exact_limits_and_domain() {
        let g = Geometry::new(5.0, 3.0, 1).unwrap();
        assert_eq!(cdf_exact(0.0, &g).unwrap(), 0.0);
        assert!((cdf_exact(1e4, &g).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cdf_exact(f64::INFINITY, &g).unwrap(), 1.0);
        assert!(cdf_exact(-1e-3, &g).is_err());
        assert!(pdf_exact(-1.0, &g).is_err());
    }

    #[test]
    fn order_statistic_reductions() {
        let g = Geometry::new(5.0, 2.0, 1).unwrap();
        let d = g.exact();
        let x = 0.2;
        let single = order_statistic_pdf(x, 1, 1, &d).unwrap();
        assert!((single - d.pdf(x)).abs() < 1e-15);
        assert!(order_statistic_pdf(x, 0, 2, &d).is_err());
        assert!(order_statistic_pdf(x, 3, 2, &d).is_err());
    }

    struct Half;
    impl GainDistribution for Half {
        fn cdf(&self, _: f64) -> f64 {
            0.5
        }
        fn pdf(&self, _: f64) -> f64 {
            0.8
        }
    }

    #[test]
    fn max_of_two_at_median() {
        let v = order_statistic_pdf(1.0, 2, 2, &Half).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
    }
}
