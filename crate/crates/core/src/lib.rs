//! Analytical and simulated performance of downlink non-orthogonal multiple
//! access (NOMA) with users dropped uniformly in a disc around the base
//! station.
//!
//! The analytic side approximates the unordered channel-gain distribution
//! with a Gauss-Chebyshev sum of exponentials ([`chebyshev`]) and builds the
//! outage ([`outage`]) and ergodic sum-rate ([`ergodic`]) expressions on top
//! of it. The [`montecarlo`] engine simulates the same system from first
//! principles so every formula can be checked against data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod chebyshev;
pub mod ergodic;
mod error;
pub mod montecarlo;
pub mod noma;
pub mod numerics;
pub mod outage;
pub mod scenario;
pub mod validate;

pub use channel::{ChannelDraw, ExactGain, GainDistribution, Geometry};
pub use chebyshev::ChebyshevModel;
pub use error::{Error, Result};
pub use montecarlo::{EstimatorResult, Scheme, Simulation};
pub use noma::{PowerAllocation, RateTargets, RateVector};

/// Converts a dB value to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
