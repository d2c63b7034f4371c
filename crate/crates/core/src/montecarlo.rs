//! Seedable Monte Carlo engine for outage probabilities and sum rates.
//!
//! Trial `i` of a run with seed `s` draws from ChaCha8 stream `i` keyed by
//! `s`, so any trial can be replayed on its own and results do not depend on
//! how trials are spread across workers. Trials are grouped into fixed-size
//! chunks; each chunk is reduced sequentially with compensated sums and the
//! chunk partials are merged in chunk order, which makes every reported mean
//! bitwise-identical for any worker count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{fill_sorted_gains, Geometry};
use crate::error::{domain, Error, Result};
use crate::noma::{
    outage_by_sinr, outage_by_threshold, psi_star_per_user, sum_rate, PowerAllocation, RateTargets,
};
use crate::numerics::CompensatedSum;

const CHUNK: u64 = 4096;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub ci95_halfwidth: f64,
    pub trials: u64,
    pub seed: u64,
}

impl EstimatorResult {
    fn deterministic(value: f64, trials: u64, seed: u64) -> Self {
        Self {
            mean: value,
            ci95_halfwidth: 0.0,
            trials,
            seed,
        }
    }

    /// Standard error implied by the CI half-width.
    pub fn std_error(&self) -> f64 {
        self.ci95_halfwidth / Z95
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Superposition coding with SIC; sum of all users' achievable rates.
    Noma,
    /// One uniformly chosen user served alone.
    OmaRandom,
    /// The strongest user served alone.
    Opportunistic,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Noma, Scheme::OmaRandom, Scheme::Opportunistic];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Noma => "noma",
            Scheme::OmaRandom => "oma_random",
            Scheme::Opportunistic => "opportunistic",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noma" => Ok(Scheme::Noma),
            "oma_random" | "oma" => Ok(Scheme::OmaRandom),
            "opportunistic" => Ok(Scheme::Opportunistic),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }
}

/// RNG for trial `index` of a run keyed by `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(stream_key(seed));
    rng.set_stream(index);
    rng
}

fn stream_key(seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

/// Derives an independent seed for sub-run `index` (e.g. one SNR point).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Default)]
struct Moments {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    fn merge(&mut self, other: &Moments) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    fn finish(&self, trials: u64, seed: u64) -> EstimatorResult {
        let n = trials as f64;
        let mean = self.sum.value() / n;
        let var = (self.sum_sq.value() / n - mean * mean).max(0.0);
        EstimatorResult {
            mean,
            ci95_halfwidth: Z95 * (var / n).sqrt(),
            trials,
            seed,
        }
    }
}

/// One simulated scenario at a single SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    geometry: Geometry,
    alloc: PowerAllocation,
    targets: Option<RateTargets>,
    rho: f64,
    trials: u64,
    seed: u64,
    workers: usize,
    oma_split: bool,
}

impl Simulation {
    pub fn new(geometry: Geometry, alloc: PowerAllocation, rho: f64) -> Result<Self> {
        if geometry.users() != alloc.users() {
            return domain("geometry and allocation disagree on the number of users");
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return domain("rho must be positive and finite");
        }
        Ok(Self {
            geometry,
            alloc,
            targets: None,
            rho,
            trials: 100_000,
            seed: 0,
            workers: 0,
            oma_split: false,
        })
    }

    pub fn with_targets(mut self, targets: RateTargets) -> Result<Self> {
        if targets.users() != self.alloc.users() {
            return domain("targets and allocation disagree on the number of users");
        }
        self.targets = Some(targets);
        Ok(self)
    }

    pub fn with_trials(mut self, trials: u64) -> Result<Self> {
        if trials < 1 {
            return domain("at least one trial is required");
        }
        self.trials = trials;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Worker threads; 0 uses the global rayon pool.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// OMA baseline gets a 1/M share of the slot instead of the whole slot.
    pub fn with_oma_split(mut self, split: bool) -> Self {
        self.oma_split = split;
        self
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    fn targets(&self) -> Result<&RateTargets> {
        self.targets
            .as_ref()
            .ok_or_else(|| Error::Domain("outage estimation needs target rates".into()))
    }

    fn check_user(&self, m: usize) -> Result<()> {
        if m < 1 || m > self.alloc.users() {
            return domain(format!("user {m} outside 1..={}", self.alloc.users()));
        }
        Ok(())
    }

    /// Runs all trials; `per_trial` writes `width` samples given the sorted
    /// gains and the trial's RNG (already advanced past the gain draws).
    fn run<F>(&self, width: usize, per_trial: F) -> Vec<EstimatorResult>
    where
        F: Fn(&mut ChaCha8Rng, &[f64], &mut [f64]) + Sync,
    {
        let key = stream_key(self.seed);
        let users = self.geometry.users();
        let chunks = self.trials.div_ceil(CHUNK);
        let chunk = |c: u64| {
            let mut gains = vec![0.0; users];
            let mut out = vec![0.0; width];
            let mut acc = vec![Moments::default(); width];
            let end = ((c + 1) * CHUNK).min(self.trials);
            for i in c * CHUNK..end {
                let mut rng = ChaCha8Rng::from_seed(key);
                rng.set_stream(i);
                fill_sorted_gains(&mut rng, &self.geometry, &mut gains);
                per_trial(&mut rng, &gains, &mut out);
                for (a, &x) in acc.iter_mut().zip(&out) {
                    a.push(x);
                }
            }
            acc
        };

        let partials: Vec<Vec<Moments>> = if self.workers == 1 {
            (0..chunks).map(chunk).collect()
        } else if self.workers == 0 {
            (0..chunks).into_par_iter().map(chunk).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool");
            pool.install(|| (0..chunks).into_par_iter().map(chunk).collect())
        };

        let mut total = vec![Moments::default(); width];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge(p);
            }
        }
        total
            .iter()
            .map(|m| m.finish(self.trials, self.seed))
            .collect()
    }

    /// Fraction of trials where user m's gain is at or below psi*_m.
    /// Infeasible users are reported as certain outage without simulating.
    pub fn estimate_outage(&self, m: usize) -> Result<EstimatorResult> {
        self.check_user(m)?;
        let targets = self.targets()?;
        let Some(threshold) = psi_star_per_user(&self.alloc, targets, self.rho)?[m - 1] else {
            return Ok(EstimatorResult::deterministic(1.0, self.trials, self.seed));
        };
        Ok(self.run(1, |_, gains, out| {
            out[0] = f64::from(u8::from(gains[m - 1] <= threshold));
        })[0])
    }

    /// Outage of user m from the raw SIC rates: outage iff some stage
    /// j <= m decodes below its target.
    pub fn estimate_outage_via_sinr(&self, m: usize) -> Result<EstimatorResult> {
        self.check_user(m)?;
        let targets = self.targets()?;
        Ok(self.run(1, |_, gains, out| {
            let hit = outage_by_sinr(gains[m - 1], m, self.rho, &self.alloc, targets);
            out[0] = f64::from(u8::from(hit));
        })[0])
    }

    /// Both outage estimators for every user from a single pass. Element
    /// `m - 1` holds `(threshold, sinr)` for user m and matches what
    /// [`Self::estimate_outage`] and [`Self::estimate_outage_via_sinr`] return.
    pub fn estimate_outage_all(&self) -> Result<Vec<(EstimatorResult, EstimatorResult)>> {
        let targets = self.targets()?;
        let users = self.alloc.users();
        let thresholds = psi_star_per_user(&self.alloc, targets, self.rho)?;
        let res = self.run(2 * users, |_, gains, out| {
            for m in 1..=users {
                let g = gains[m - 1];
                out[2 * (m - 1)] = f64::from(u8::from(outage_by_threshold(g, thresholds[m - 1])));
                out[2 * m - 1] = f64::from(u8::from(outage_by_sinr(
                    g,
                    m,
                    self.rho,
                    &self.alloc,
                    targets,
                )));
            }
        });
        Ok((1..=users)
            .map(|m| {
                let by_threshold = match thresholds[m - 1] {
                    Some(_) => res[2 * (m - 1)],
                    None => EstimatorResult::deterministic(1.0, self.trials, self.seed),
                };
                (by_threshold, res[2 * m - 1])
            })
            .collect())
    }

    fn oma_rate(&self, gain: f64) -> f64 {
        let r = (self.rho * gain).ln_1p() / std::f64::consts::LN_2;
        if self.oma_split {
            r / self.alloc.users() as f64
        } else {
            r
        }
    }

    /// Outage of the OMA benchmark: a uniformly chosen user must carry the
    /// total target rate of all users.
    pub fn estimate_oma_outage(&self) -> Result<EstimatorResult> {
        let total = self.targets()?.total();
        let users = self.alloc.users();
        Ok(self.run(1, |rng, gains, out| {
            let u = rng.random_range(0..users);
            out[0] = f64::from(u8::from(self.oma_rate(gains[u]) < total));
        })[0])
    }

    pub fn estimate_sum_rate(&self, scheme: Scheme) -> Result<EstimatorResult> {
        let all = self.estimate_sum_rates();
        Ok(match scheme {
            Scheme::Noma => all[0],
            Scheme::OmaRandom => all[1],
            Scheme::Opportunistic => all[2],
        })
    }

    /// Sum rates of all schemes (in [`Scheme::ALL`] order) from one pass.
    pub fn estimate_sum_rates(&self) -> [EstimatorResult; 3] {
        let users = self.alloc.users();
        let r = self.run(3, |rng, gains, out| {
            let u = rng.random_range(0..users);
            out[0] = sum_rate(gains, self.rho, &self.alloc);
            out[1] = self.oma_rate(gains[u]);
            out[2] = (self.rho * gains[users - 1]).ln_1p() / std::f64::consts::LN_2;
        });
        [r[0], r[1], r[2]]
    }
}
