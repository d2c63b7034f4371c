//! Scenario files and the sweep pipelines behind the command-line tool.
//!
//! A scenario is a JSON document (`"schema": 1`). Each pipeline evaluates the
//! analytic expressions and the Monte Carlo estimators at every SNR point and
//! returns rows that serialize to a fixed-column CSV and to JSON.
//!
//! Seeds: SNR point `i` of a run with seed `s` simulates with
//! `derive_seed(s, i)`; grid cell `g` of a sweep first derives
//! `derive_seed(s, g)` and then the per-point seeds from that.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{GainDistribution, Geometry};
use crate::chebyshev::{ChebyshevModel, DEFAULT_ORDER};
use crate::db_to_linear;
use crate::ergodic::{asymptotic_sum_rate, ergodic_high_snr, ErgodicReport};
use crate::error::{Error, Result};
use crate::montecarlo::{derive_seed, EstimatorResult, Simulation};
use crate::noma::{default_allocation, feasibility, PowerAllocation, RateTargets};
use crate::outage::{
    diversity_fit_window, fit_diversity_order, outage_exact, outage_high_snr, outage_reference,
    OutageReport,
};

pub const SCHEMA_VERSION: u32 = 1;

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_trials() -> u64 {
    100_000
}

/// Power allocation as written in a scenario: `"default"` or explicit list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "AllocField", into = "AllocField")]
pub enum AllocSpec {
    #[default]
    Default,
    Explicit(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AllocField {
    Keyword(String),
    Values(Vec<f64>),
}

impl TryFrom<AllocField> for AllocSpec {
    type Error = String;

    fn try_from(v: AllocField) -> std::result::Result<Self, String> {
        match v {
            AllocField::Keyword(k) if k == "default" => Ok(AllocSpec::Default),
            AllocField::Keyword(k) => {
                Err(format!("alloc must be \"default\" or a list, got \"{k}\""))
            }
            AllocField::Values(v) => Ok(AllocSpec::Explicit(v)),
        }
    }
}

impl From<AllocSpec> for AllocField {
    fn from(v: AllocSpec) -> Self {
        match v {
            AllocSpec::Default => AllocField::Keyword("default".into()),
            AllocSpec::Explicit(v) => AllocField::Values(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub users: usize,
    pub radius_m: f64,
    pub alpha: f64,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub alloc: AllocSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets_bpcu: Option<Vec<f64>>,
    #[serde(default = "default_order")]
    pub quadrature_n: usize,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub oma_split: bool,
    /// Worker threads for the Monte Carlo engine; 0 means all cores.
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_users: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_alpha: Option<Vec<f64>>,
}

fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
        .unwrap_or(1)
}

impl ScenarioConfig {
    /// Parses and validates a scenario. Errors carry the offending line.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                strip_position(&e)
            ))
        })?;
        cfg.validate().map_err(|(key, msg)| {
            Error::Config(format!("line {}: `{key}`: {msg}", line_of(text, key)))
        })?;
        Ok(cfg)
    }

    /// Validates a scenario built in code.
    pub fn check(&self) -> Result<()> {
        self.validate()
            .map_err(|(key, msg)| Error::Config(format!("`{key}`: {msg}")))
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.schema != SCHEMA_VERSION {
            return Err((
                "schema",
                format!(
                    "unsupported schema {}, expected {SCHEMA_VERSION}",
                    self.schema
                ),
            ));
        }
        if self.users < 1 {
            return Err(("users", "at least one user is required".into()));
        }
        Geometry::new(self.radius_m, self.alpha, self.users).map_err(|e| {
            let key = if self.radius_m > 0.0 {
                "alpha"
            } else {
                "radius_m"
            };
            (key, e.to_string())
        })?;
        if self.snr_db.is_empty() {
            return Err(("snr_db", "at least one SNR point is required".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(("snr_db", "SNR values must be finite".into()));
        }
        if let AllocSpec::Explicit(a) = &self.alloc {
            if a.len() != self.users {
                return Err((
                    "alloc",
                    format!("expected {} coefficients, got {}", self.users, a.len()),
                ));
            }
            PowerAllocation::new(a.clone()).map_err(|e| ("alloc", e.to_string()))?;
        }
        if let Some(t) = &self.targets_bpcu {
            if t.len() != self.users {
                return Err((
                    "targets_bpcu",
                    format!("expected {} targets, got {}", self.users, t.len()),
                ));
            }
            RateTargets::new(t.clone()).map_err(|e| ("targets_bpcu", e.to_string()))?;
        }
        if self.quadrature_n < 1 {
            return Err(("quadrature_n", "quadrature order must be at least 1".into()));
        }
        if self.trials < 1 {
            return Err(("trials", "at least one trial is required".into()));
        }
        if let Some(u) = &self.sweep_users {
            if u.is_empty() || u.contains(&0) {
                return Err((
                    "sweep_users",
                    "user counts must be nonempty and positive".into(),
                ));
            }
        }
        if let Some(a) = &self.sweep_alpha {
            if a.is_empty() || a.iter().any(|x| !(*x >= 1.0)) {
                return Err((
                    "sweep_alpha",
                    "path-loss exponents must be nonempty and >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.radius_m, self.alpha, self.users)
    }

    pub fn allocation(&self) -> Result<PowerAllocation> {
        match &self.alloc {
            AllocSpec::Default => default_allocation(self.users),
            AllocSpec::Explicit(a) => PowerAllocation::new(a.clone()),
        }
    }

    pub fn targets(&self) -> Result<Option<RateTargets>> {
        self.targets_bpcu.clone().map(RateTargets::new).transpose()
    }

    pub fn model(&self) -> Result<ChebyshevModel> {
        ChebyshevModel::new(&self.geometry()?, self.quadrature_n)
    }

    fn simulation(&self, rho: f64, seed: u64) -> Result<Simulation> {
        let mut sim = Simulation::new(self.geometry()?, self.allocation()?, rho)?
            .with_trials(self.trials)?
            .with_seed(seed)
            .with_workers(self.workers)
            .with_oma_split(self.oma_split);
        if let Some(t) = self.targets()? {
            sim = sim.with_targets(t)?;
        }
        Ok(sim)
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

/// Provenance attached to JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunMetadata {
    pub tool_version: String,
    pub git_hash: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageRow {
    pub snr_db: f64,
    pub users: Vec<OutageReport>,
    /// Analytic OMA outage on the exact gain distribution.
    pub oma_analytic: f64,
    pub oma_empirical: EstimatorResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageSweep {
    pub users: usize,
    pub feasible: Vec<bool>,
    pub rows: Vec<OutageRow>,
    /// Fitted diversity order per user, from the analytic curve restricted
    /// to probabilities in [1e-6, 0.1].
    pub diversity: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

/// Outage probability of a uniformly scheduled OMA user that must carry the
/// sum of all target rates.
pub fn oma_outage_analytic<D: GainDistribution + ?Sized>(
    dist: &D,
    targets: &RateTargets,
    rho: f64,
    split: bool,
) -> f64 {
    let users = targets.users() as f64;
    let rate = if split {
        targets.total() * users
    } else {
        targets.total()
    };
    dist.cdf((rate.exp2() - 1.0) / rho)
}

/// Fixed-rate pipeline: per-user outage, analytic and simulated, at every SNR.
pub fn run_outage(cfg: &ScenarioConfig) -> Result<OutageSweep> {
    cfg.check()?;
    let targets = cfg
        .targets()?
        .ok_or_else(|| Error::Config("outage runs need `targets_bpcu`".into()))?;
    let geometry = cfg.geometry()?;
    let alloc = cfg.allocation()?;
    let model = cfg.model()?;
    let feasible = feasibility(&alloc, &targets)?;
    let warnings = feasible
        .iter()
        .enumerate()
        .filter(|(_, f)| !**f)
        .map(|(j, _)| {
            format!(
                "user {} violates a_j > phi_j * sum_{{i>j}} a_i (a_j = {}, phi_j = {}); outage is 1 for users {}..={}",
                j + 1,
                alloc.coeff(j + 1),
                targets.phi()[j],
                j + 1,
                cfg.users
            )
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.snr_db.len());
    for (i, &snr_db) in cfg.snr_db.iter().enumerate() {
        let rho = db_to_linear(snr_db);
        let sim = cfg.simulation(rho, derive_seed(cfg.seed, i as u64))?;
        let empirical = sim.estimate_outage_all()?;
        let mut users = Vec::with_capacity(cfg.users);
        for m in 1..=cfg.users {
            let exact = outage_exact(&model, &alloc, &targets, rho, m)?;
            let reference = outage_reference(&geometry, &alloc, &targets, rho, m)?;
            let high = outage_high_snr(&model, &alloc, &targets, rho, m)?;
            users.push(OutageReport {
                user: m,
                feasible: exact.feasible,
                analytic_exact: clamp01(exact.probability),
                analytic_reference: clamp01(reference.probability),
                analytic_high_snr: clamp01(high.probability),
                empirical: empirical[m - 1].0,
                empirical_sinr: empirical[m - 1].1,
                diversity_slope: None,
            });
        }
        rows.push(OutageRow {
            snr_db,
            users,
            oma_analytic: clamp01(oma_outage_analytic(
                &geometry.exact(),
                &targets,
                rho,
                cfg.oma_split,
            )),
            oma_empirical: sim.estimate_oma_outage()?,
        });
    }

    let diversity: Vec<Option<f64>> = (0..cfg.users)
        .map(|u| {
            let curve: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (db_to_linear(r.snr_db), r.users[u].analytic_exact))
                .collect();
            fit_diversity_order(&diversity_fit_window(&curve)).ok()
        })
        .collect();
    for row in &mut rows {
        for (u, rep) in row.users.iter_mut().enumerate() {
            rep.diversity_slope = diversity[u];
        }
    }

    Ok(OutageSweep {
        users: cfg.users,
        feasible,
        rows,
        diversity,
        warnings,
    })
}

/// Fixed CSV header for an outage sweep with `users` users.
pub fn outage_csv_header(users: usize) -> Vec<String> {
    let mut cols = vec!["snr_db".to_string()];
    for m in 1..=users {
        for c in [
            "feasible",
            "exact",
            "reference",
            "high_snr",
            "empirical",
            "ci95",
            "sinr",
            "sinr_ci95",
        ] {
            cols.push(format!("u{m}_{c}"));
        }
    }
    cols.extend(["oma_analytic", "oma_empirical", "oma_ci95"].map(String::from));
    cols
}

impl OutageSweep {
    pub fn header(&self) -> Vec<String> {
        outage_csv_header(self.users)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![row.snr_db.to_string()];
            for u in &row.users {
                fields.push(u8::from(u.feasible).to_string());
                for v in [
                    u.analytic_exact,
                    u.analytic_reference,
                    u.analytic_high_snr,
                    u.empirical.mean,
                    u.empirical.ci95_halfwidth,
                    u.empirical_sinr.mean,
                    u.empirical_sinr.ci95_halfwidth,
                ] {
                    fields.push(v.to_string());
                }
            }
            for v in [
                row.oma_analytic,
                row.oma_empirical.mean,
                row.oma_empirical.ci95_halfwidth,
            ] {
                fields.push(v.to_string());
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn to_json(&self, cfg: &ScenarioConfig, meta: &RunMetadata) -> String {
        let doc = serde_json::json!({
            "metadata": meta,
            "config": cfg,
            "columns": self.header(),
            "feasible": self.feasible,
            "diversity": self.diversity,
            "warnings": self.warnings,
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicRow {
    pub users: usize,
    pub alpha: f64,
    pub snr_db: f64,
    pub report: ErgodicReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicSweep {
    /// Whether rows carry the `users,alpha` grid columns.
    pub grid: bool,
    pub rows: Vec<ErgodicRow>,
}

fn ergodic_rows(cfg: &ScenarioConfig, seed: u64) -> Result<Vec<ErgodicRow>> {
    let model = cfg.model()?;
    let alloc = cfg.allocation()?;
    let mut rows = Vec::with_capacity(cfg.snr_db.len());
    for (i, &snr_db) in cfg.snr_db.iter().enumerate() {
        let rho = db_to_linear(snr_db);
        let sim = cfg.simulation(rho, derive_seed(seed, i as u64))?;
        let [noma, oma, opp] = sim.estimate_sum_rates();
        let closed = match ergodic_high_snr(&model, &alloc, rho) {
            Ok(v) => v,
            Err(Error::TooManyCompositions { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        let asymptote = if cfg.users >= 16 {
            asymptotic_sum_rate(rho, cfg.users as u64).ok()
        } else {
            None
        };
        rows.push(ErgodicRow {
            users: cfg.users,
            alpha: cfg.alpha,
            snr_db,
            report: ErgodicReport {
                high_snr_rate: if closed.is_nan() {
                    closed
                } else {
                    closed.max(0.0)
                },
                empirical_rate: noma,
                asymptote: asymptote.map(|a| a.max(0.0)),
                baseline_random: oma,
                baseline_opportunistic: opp,
            },
        });
    }
    Ok(rows)
}

/// Adaptive-rate pipeline: sum rates of all schemes plus the closed forms.
pub fn run_ergodic(cfg: &ScenarioConfig) -> Result<ErgodicSweep> {
    cfg.check()?;
    if cfg.targets_bpcu.is_some() {
        return Err(Error::Config(
            "ergodic runs serve users at their achievable rates; remove `targets_bpcu`".into(),
        ));
    }
    Ok(ErgodicSweep {
        grid: false,
        rows: ergodic_rows(cfg, cfg.seed)?,
    })
}

/// Ergodic pipeline over a grid of user counts and path-loss exponents.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<ErgodicSweep> {
    cfg.check()?;
    if cfg.targets_bpcu.is_some() {
        return Err(Error::Config(
            "sweeps serve users at their achievable rates; remove `targets_bpcu`".into(),
        ));
    }
    let users = cfg.sweep_users.clone().unwrap_or_else(|| vec![cfg.users]);
    let alphas = cfg.sweep_alpha.clone().unwrap_or_else(|| vec![cfg.alpha]);
    if users.iter().any(|&u| u != cfg.users) && cfg.alloc != AllocSpec::Default {
        return Err(Error::Config(
            "`sweep_users` requires `alloc: \"default\"`".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &m in &users {
        for &alpha in &alphas {
            let sub = ScenarioConfig {
                users: m,
                alpha,
                ..cfg.clone()
            };
            sub.check()?;
            rows.extend(ergodic_rows(&sub, derive_seed(cfg.seed, cell))?);
            cell += 1;
        }
    }
    Ok(ErgodicSweep { grid: true, rows })
}

pub const ERGODIC_COLUMNS: [&str; 9] = [
    "snr_db",
    "noma",
    "noma_ci95",
    "oma_random",
    "oma_random_ci95",
    "opportunistic",
    "opportunistic_ci95",
    "noma_high_snr",
    "noma_asymptote",
];

fn opt_field(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => String::new(),
    }
}

impl ErgodicSweep {
    pub fn header(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        if self.grid {
            cols.push("users".into());
            cols.push("alpha".into());
        }
        cols.extend(ERGODIC_COLUMNS.iter().map(|s| s.to_string()));
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            let r = &row.report;
            let mut fields = Vec::new();
            if self.grid {
                fields.push(row.users.to_string());
                fields.push(row.alpha.to_string());
            }
            fields.push(row.snr_db.to_string());
            for e in [
                &r.empirical_rate,
                &r.baseline_random,
                &r.baseline_opportunistic,
            ] {
                fields.push(e.mean.to_string());
                fields.push(e.ci95_halfwidth.to_string());
            }
            fields.push(opt_field(Some(r.high_snr_rate)));
            fields.push(opt_field(r.asymptote));
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn to_json(&self, cfg: &ScenarioConfig, meta: &RunMetadata) -> String {
        let doc = serde_json::json!({
            "metadata": meta,
            "config": cfg,
            "columns": self.header(),
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}
