//! Python bindings for `noma-core`.
//!
//! Power allocations and rate targets cross the boundary as plain lists of
//! floats; geometry, the Chebyshev model and the simulator are classes.

use noma_core::chebyshev::DEFAULT_ORDER;
use noma_core::montecarlo::trial_rng;
use noma_core::noma::{self as core_noma, RateTargets};
use noma_core::scenario::{run_ergodic, run_outage, run_sweep, RunMetadata, ScenarioConfig};
use noma_core::validate::{run_validation, ValidationOptions};
use noma_core::{channel, ergodic, numerics, outage, Error, GainDistribution};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Quadrature { .. } | Error::NoSignChange { .. } | Error::Fit(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn alloc_of(coeffs: Vec<f64>) -> PyResult<core_noma::PowerAllocation> {
    core_noma::PowerAllocation::new(coeffs).map_err(to_py)
}

fn targets_of(targets: Vec<f64>) -> PyResult<RateTargets> {
    RateTargets::new(targets).map_err(to_py)
}

/// Disc of radius `radius` with path-loss exponent `alpha` and `users` users.
#[pyclass(frozen)]
struct Geometry {
    inner: noma_core::Geometry,
}

#[pymethods]
impl Geometry {
    #[new]
    fn new(radius: f64, alpha: f64, users: usize) -> PyResult<Self> {
        Ok(Self {
            inner: noma_core::Geometry::new(radius, alpha, users).map_err(to_py)?,
        })
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn users(&self) -> usize {
        self.inner.users()
    }

    fn cdf_exact(&self, y: f64) -> PyResult<f64> {
        channel::cdf_exact(y, &self.inner).map_err(to_py)
    }

    fn pdf_exact(&self, y: f64) -> PyResult<f64> {
        channel::pdf_exact(y, &self.inner).map_err(to_py)
    }

    /// Sorted gains of trial `index` under `seed`, as the simulator draws them.
    fn sample_gains(&self, seed: u64, index: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.inner.users()];
        channel::fill_sorted_gains(&mut trial_rng(seed, index), &self.inner, &mut out);
        out
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(radius={}, alpha={}, users={})",
            self.inner.radius(),
            self.inner.alpha(),
            self.inner.users()
        )
    }
}

#[pyclass(frozen)]
struct ChebyshevModel {
    inner: noma_core::ChebyshevModel,
}

#[pymethods]
impl ChebyshevModel {
    #[new]
    #[pyo3(signature = (geometry, order = DEFAULT_ORDER, normalized = true))]
    fn new(geometry: &Geometry, order: usize, normalized: bool) -> PyResult<Self> {
        let inner = if normalized {
            noma_core::ChebyshevModel::new(&geometry.inner, order)
        } else {
            noma_core::ChebyshevModel::unnormalized(&geometry.inner, order)
        };
        Ok(Self {
            inner: inner.map_err(to_py)?,
        })
    }

    fn cdf(&self, y: f64) -> PyResult<f64> {
        self.inner.cdf_approx(y).map_err(to_py)
    }

    fn pdf(&self, y: f64) -> PyResult<f64> {
        self.inner.pdf_approx(y).map_err(to_py)
    }

    fn survival(&self, y: f64) -> f64 {
        self.inner.survival(y)
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.inner.b().to_vec()
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.inner.c().to_vec()
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.inner.beta().to_vec()
    }
}

/// Mean with a 95% confidence half-width.
#[pyclass(frozen, get_all)]
struct Estimate {
    mean: f64,
    ci95_halfwidth: f64,
    trials: u64,
    seed: u64,
}

impl From<noma_core::EstimatorResult> for Estimate {
    fn from(r: noma_core::EstimatorResult) -> Self {
        Self {
            mean: r.mean,
            ci95_halfwidth: r.ci95_halfwidth,
            trials: r.trials,
            seed: r.seed,
        }
    }
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(mean={}, ci95_halfwidth={}, trials={})",
            self.mean, self.ci95_halfwidth, self.trials
        )
    }
}

#[pyclass(frozen)]
struct Simulation {
    inner: noma_core::Simulation,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (geometry, alloc, rho, trials = 100_000, seed = 0, targets = None, workers = 0, oma_split = false))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        geometry: &Geometry,
        alloc: Vec<f64>,
        rho: f64,
        trials: u64,
        seed: u64,
        targets: Option<Vec<f64>>,
        workers: usize,
        oma_split: bool,
    ) -> PyResult<Self> {
        let mut sim = noma_core::Simulation::new(geometry.inner, alloc_of(alloc)?, rho)
            .map_err(to_py)?
            .with_trials(trials)
            .map_err(to_py)?
            .with_seed(seed)
            .with_workers(workers)
            .with_oma_split(oma_split);
        if let Some(t) = targets {
            sim = sim.with_targets(targets_of(t)?).map_err(to_py)?;
        }
        Ok(Self { inner: sim })
    }

    fn estimate_outage(&self, py: Python<'_>, m: usize) -> PyResult<Estimate> {
        py.detach(|| self.inner.estimate_outage(m))
            .map(Into::into)
            .map_err(to_py)
    }

    fn estimate_outage_via_sinr(&self, py: Python<'_>, m: usize) -> PyResult<Estimate> {
        py.detach(|| self.inner.estimate_outage_via_sinr(m))
            .map(Into::into)
            .map_err(to_py)
    }

    fn estimate_oma_outage(&self, py: Python<'_>) -> PyResult<Estimate> {
        py.detach(|| self.inner.estimate_oma_outage())
            .map(Into::into)
            .map_err(to_py)
    }

    /// `scheme` is one of "noma", "oma_random", "opportunistic".
    fn estimate_sum_rate(&self, py: Python<'_>, scheme: &str) -> PyResult<Estimate> {
        let scheme: noma_core::Scheme = scheme.parse().map_err(to_py)?;
        py.detach(|| self.inner.estimate_sum_rate(scheme))
            .map(Into::into)
            .map_err(to_py)
    }
}

#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    noma_core::db_to_linear(db)
}

#[pyfunction]
fn default_allocation(users: usize) -> PyResult<Vec<f64>> {
    Ok(core_noma::default_allocation(users)
        .map_err(to_py)?
        .coeffs()
        .to_vec())
}

/// Per-user achievable rates for one set of gains (sorted internally).
#[pyfunction]
fn achievable_rates(gains: Vec<f64>, rho: f64, alloc: Vec<f64>) -> PyResult<Vec<f64>> {
    let draw = noma_core::ChannelDraw::from_raw(gains, 0).map_err(to_py)?;
    let rates = core_noma::achievable_rates(&draw, rho, &alloc_of(alloc)?).map_err(to_py)?;
    Ok(rates.rates)
}

/// psi*_m for every user; `None` from the first infeasible user on.
#[pyfunction]
fn psi_star(alloc: Vec<f64>, targets: Vec<f64>, rho: f64) -> PyResult<Vec<Option<f64>>> {
    core_noma::psi_star_per_user(&alloc_of(alloc)?, &targets_of(targets)?, rho).map_err(to_py)
}

#[pyfunction]
fn outage_exact(
    model: &ChebyshevModel,
    alloc: Vec<f64>,
    targets: Vec<f64>,
    rho: f64,
    m: usize,
) -> PyResult<f64> {
    outage::outage_exact(
        &model.inner,
        &alloc_of(alloc)?,
        &targets_of(targets)?,
        rho,
        m,
    )
    .map(|o| o.probability)
    .map_err(to_py)
}

#[pyfunction]
fn outage_reference(
    geometry: &Geometry,
    alloc: Vec<f64>,
    targets: Vec<f64>,
    rho: f64,
    m: usize,
) -> PyResult<f64> {
    outage::outage_reference(
        &geometry.inner,
        &alloc_of(alloc)?,
        &targets_of(targets)?,
        rho,
        m,
    )
    .map(|o| o.probability)
    .map_err(to_py)
}

#[pyfunction]
fn outage_high_snr(
    model: &ChebyshevModel,
    alloc: Vec<f64>,
    targets: Vec<f64>,
    rho: f64,
    m: usize,
) -> PyResult<f64> {
    outage::outage_high_snr(
        &model.inner,
        &alloc_of(alloc)?,
        &targets_of(targets)?,
        rho,
        m,
    )
    .map(|o| o.probability)
    .map_err(to_py)
}

/// Minus the log-log slope of `(rho, probability)` pairs.
#[pyfunction]
fn fit_diversity_order(curve: Vec<(f64, f64)>) -> PyResult<f64> {
    outage::fit_diversity_order(&curve).map_err(to_py)
}

#[pyfunction]
fn ergodic_high_snr(model: &ChebyshevModel, alloc: Vec<f64>, rho: f64) -> PyResult<f64> {
    ergodic::ergodic_high_snr(&model.inner, &alloc_of(alloc)?, rho).map_err(to_py)
}

#[pyfunction]
fn asymptotic_sum_rate(rho: f64, users: u64) -> PyResult<f64> {
    ergodic::asymptotic_sum_rate(rho, users).map_err(to_py)
}

/// Returns `(root, leading_order)` for `1 - F(u) = 1/users`.
#[pyfunction]
fn solve_u_m(model: &ChebyshevModel, users: u64) -> PyResult<(f64, f64)> {
    let s = ergodic::solve_u_m(&model.inner, users).map_err(to_py)?;
    Ok((s.root, s.leading_order))
}

/// `e^z E1(z)`, equal to the Whittaker term `e^{z/2} z^{-1/2} W_{-1/2,0}(z)`.
#[pyfunction]
fn exp_e1_scaled(z: f64) -> PyResult<f64> {
    numerics::exp_e1_scaled(z).map_err(to_py)
}

/// Runs a JSON scenario. `kind` is "outage", "ergodic" or "sweep".
/// Returns `(csv, json)`.
#[pyfunction]
fn run_scenario(py: Python<'_>, kind: &str, config_json: &str) -> PyResult<(String, String)> {
    let cfg = ScenarioConfig::from_json(config_json).map_err(to_py)?;
    let meta = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        ..Default::default()
    };
    py.detach(|| match kind {
        "outage" => run_outage(&cfg).map(|s| (s.to_csv(), s.to_json(&cfg, &meta))),
        "ergodic" => run_ergodic(&cfg).map(|s| (s.to_csv(), s.to_json(&cfg, &meta))),
        "sweep" => run_sweep(&cfg).map(|s| (s.to_csv(), s.to_json(&cfg, &meta))),
        other => Err(Error::Config(format!("unknown scenario kind \"{other}\""))),
    })
    .map_err(to_py)
}

/// Internal consistency checks as `(name, measured, tolerance, passed)`.
#[pyfunction]
#[pyo3(signature = (trials = 200_000, seed = 1))]
fn validate(py: Python<'_>, trials: u64, seed: u64) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let opts = ValidationOptions {
        trials,
        seed,
        ..Default::default()
    };
    let checks = py.detach(|| run_validation(&opts)).map_err(to_py)?;
    Ok(checks
        .into_iter()
        .map(|c| (c.name, c.measured, c.tolerance, c.passed))
        .collect())
}

#[pymodule]
fn noma(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Geometry>()?;
    m.add_class::<ChebyshevModel>()?;
    m.add_class::<Simulation>()?;
    m.add_class::<Estimate>()?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(default_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(achievable_rates, m)?)?;
    m.add_function(wrap_pyfunction!(psi_star, m)?)?;
    m.add_function(wrap_pyfunction!(outage_exact, m)?)?;
    m.add_function(wrap_pyfunction!(outage_reference, m)?)?;
    m.add_function(wrap_pyfunction!(outage_high_snr, m)?)?;
    m.add_function(wrap_pyfunction!(fit_diversity_order, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_high_snr, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_sum_rate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_u_m, m)?)?;
    m.add_function(wrap_pyfunction!(exp_e1_scaled, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
