//! Gauss-Chebyshev approximation of the unordered-gain distribution.
//!
//! Mapping the distance integral onto `[-1, 1]` and applying an N-node
//! Chebyshev rule turns the CDF into a finite sum of exponentials,
//!
//! ```text
//! F(y) ~ (1/R_D) * sum_{n=0}^{N} b_n exp(-c_n y),   c_0 = 0,
//! f(y) ~ (1/R_D) * sum_{n=1}^{N} beta_n exp(-c_n y), beta_n = -b_n c_n,
//! ```
//!
//! which is what makes the outage and ergodic expressions tractable.
//!
//! The raw N-node rule does not integrate the weight exactly, so
//! `b_0 / R_D = (pi/2N) / sin(pi/2N)` rather than 1 (about 1.0041 at N = 10).
//! [`ChebyshevModel::new`] rescales every `b_n` and `beta_n` by the same
//! factor so the approximate distribution is proper: `F(0) = 0`,
//! `F(inf) = 1` and the density integrates to one.
//! [`ChebyshevModel::unnormalized`] keeps the raw constants.

use serde::Serialize;

use crate::channel::{GainDistribution, Geometry};
use crate::error::{domain, Result};

/// Default quadrature order.
pub const DEFAULT_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevModel {
    order: usize,
    radius: f64,
    alpha: f64,
    nodes: Vec<f64>,
    weight: f64,
    // c, b, beta are indexed 0..=N with c[0] = 0, beta[0] = 0.
    c: Vec<f64>,
    b: Vec<f64>,
    beta: Vec<f64>,
    scale: f64,
}

impl ChebyshevModel {
    /// Normalized model (`b_0 = R_D`).
    pub fn new(geometry: &Geometry, order: usize) -> Result<Self> {
        Self::build(geometry, order, true)
    }

    /// Model with the raw quadrature constants, `b_0 = -sum_{n>=1} b_n`.
    pub fn unnormalized(geometry: &Geometry, order: usize) -> Result<Self> {
        Self::build(geometry, order, false)
    }

    fn build(geometry: &Geometry, order: usize, normalize: bool) -> Result<Self> {
        if order < 1 {
            return domain("quadrature order must be at least 1");
        }
        let radius = geometry.radius();
        let alpha = geometry.alpha();
        let n_f = order as f64;
        let weight = std::f64::consts::PI / n_f;

        let nodes: Vec<f64> = (1..=order)
            .map(|n| ((2 * n - 1) as f64 * std::f64::consts::PI / (2.0 * n_f)).cos())
            .collect();

        let mut c = Vec::with_capacity(order + 1);
        let mut b = Vec::with_capacity(order + 1);
        c.push(0.0);
        b.push(0.0);
        for &theta in &nodes {
            let dist = 0.5 * radius * theta + 0.5 * radius;
            c.push(1.0 + dist.powf(alpha));
            b.push(-weight * (1.0 - theta * theta).sqrt() * dist);
        }
        let raw_b0: f64 = -b[1..].iter().sum::<f64>();
        let scale = if normalize { radius / raw_b0 } else { 1.0 };
        for v in b.iter_mut().skip(1) {
            *v *= scale;
        }
        b[0] = -b[1..].iter().sum::<f64>();
        let beta = b.iter().zip(&c).map(|(bn, cn)| -bn * cn).collect();

        Ok(Self {
            order,
            radius,
            alpha,
            nodes,
            weight,
            c,
            b,
            beta,
            scale,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Chebyshev nodes theta_1..theta_N (index n-1 holds theta_n).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Common node weight pi/N.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Exponents c_0..c_N with c_0 = 0.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Coefficients b_0..b_N.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Density coefficients beta_0..beta_N with beta_0 = 0.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Factor applied to the raw b_n and beta_n (1 for the unnormalized model).
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    /// eta = (1/R_D) * sum beta_n, the density at the origin.
    pub fn eta(&self) -> f64 {
        self.beta.iter().sum::<f64>() / self.radius
    }

    /// Index of the node with the smallest c_n (n >= 1). The nodes decrease
    /// monotonically, so this is N.
    pub fn slowest_node(&self) -> usize {
        (1..=self.order)
            .min_by(|&i, &j| self.c[i].total_cmp(&self.c[j]))
            .expect("order >= 1")
    }

    fn check_arg(y: f64) -> Result<()> {
        if !(y >= 0.0) {
            return domain(format!("argument must be >= 0, got {y}"));
        }
        Ok(())
    }

    /// Approximate CDF. Not clamped to [0, 1].
    pub fn cdf_approx(&self, y: f64) -> Result<f64> {
        Self::check_arg(y)?;
        Ok(self.cdf_unchecked(y))
    }

    pub fn pdf_approx(&self, y: f64) -> Result<f64> {
        Self::check_arg(y)?;
        Ok(self.pdf_unchecked(y))
    }

    fn cdf_unchecked(&self, y: f64) -> f64 {
        let s: f64 = self
            .b
            .iter()
            .zip(&self.c)
            .map(|(bn, cn)| bn * (-cn * y).exp())
            .sum();
        s / self.radius
    }

    fn pdf_unchecked(&self, y: f64) -> f64 {
        let s: f64 = self
            .beta
            .iter()
            .zip(&self.c)
            .skip(1)
            .map(|(bn, cn)| bn * (-cn * y).exp())
            .sum();
        s / self.radius
    }

    /// `1 - F(y)` summed directly over the decaying terms.
    pub fn survival_approx(&self, y: f64) -> f64 {
        let tail: f64 = self
            .b
            .iter()
            .zip(&self.c)
            .skip(1)
            .map(|(bn, cn)| bn * (-cn * y).exp())
            .sum();
        (self.radius - self.b[0] - tail) / self.radius
    }

    /// Small-argument CDF linearization `eta * y`.
    pub fn small_y_cdf(&self, y: f64) -> f64 {
        self.eta() * y
    }

    /// Small-argument pdf linearization `(1/R_D) sum beta_n (1 - c_n y)`.
    pub fn small_y_pdf(&self, y: f64) -> f64 {
        self.beta
            .iter()
            .zip(&self.c)
            .skip(1)
            .map(|(bn, cn)| bn * (1.0 - cn * y))
            .sum::<f64>()
            / self.radius
    }

    /// Test hook: perturbs b_0 so the `sum b_n = 0` invariant breaks.
    #[doc(hidden)]
    pub fn corrupt_b0(&mut self, delta: f64) {
        self.b[0] += delta;
    }
}

impl GainDistribution for ChebyshevModel {
    fn cdf(&self, y: f64) -> f64 {
        self.cdf_unchecked(y)
    }

    fn pdf(&self, y: f64) -> f64 {
        self.pdf_unchecked(y)
    }

    fn survival(&self, y: f64) -> f64 {
        self.survival_approx(y)
    }
}
