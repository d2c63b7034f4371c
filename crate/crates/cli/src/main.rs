use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use noma_core::scenario::{run_ergodic, run_outage, run_sweep, RunMetadata, ScenarioConfig};
use noma_core::validate::{all_passed, format_table, run_validation, ValidationOptions};
use noma_core::Error;

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "noma",
    version,
    about = "Downlink NOMA outage and sum-rate sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-user outage probability, analytic and simulated.
    Outage(RunArgs),
    /// Ergodic sum rate of NOMA and the OMA baselines.
    Ergodic(RunArgs),
    /// Ergodic sum rate over a grid of user counts and path-loss exponents.
    Sweep(RunArgs),
    /// Internal consistency checks; exits 1 if any fails.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long = "quadrature-n")]
    quadrature_n: Option<usize>,
    /// Monte Carlo worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and JSON.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// OMA users share the channel in time, each getting 1/M of it.
    #[arg(long = "oma-split")]
    oma_split: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario supplying radius and path-loss exponent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write validate.json here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long = "corrupt-b0", hide = true, default_value_t = 0.0)]
    corrupt_b0: f64,
}

enum Failure {
    Config(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Domain(_)
            | Error::Infeasible { .. }
            | Error::TooManyCompositions { .. } => Failure::Config(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn git_hash() -> String {
    Command::new("git")
        .args(["rev-parse", "--short", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

fn load_config(path: &Path, ov: &Overrides, oma_split: bool) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::from_json(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(t) = ov.trials {
        cfg.trials = t;
    }
    if let Some(n) = ov.quadrature_n {
        cfg.quadrature_n = n;
    }
    if let Some(w) = ov.workers {
        cfg.workers = w;
    }
    cfg.oma_split |= oma_split;
    cfg.check()?;
    Ok(cfg)
}

fn write_outputs(out: &Path, stem: &str, csv: &str, json: &str) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    for (ext, body) in [("csv", csv), ("json", json)] {
        let path = out.join(format!("{stem}.{ext}"));
        fs::write(&path, body).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn metadata(seed: u64, started: u64) -> RunMetadata {
    RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        git_hash: git_hash(),
        seed,
        started_unix: started,
        finished_unix: unix_now(),
    }
}

fn cmd_outage(args: &RunArgs) -> Result<(), Failure> {
    let started = unix_now();
    let cfg = load_config(&args.config, &args.overrides, args.oma_split)?;
    let sweep = run_outage(&cfg)?;
    for w in &sweep.warnings {
        eprintln!("warning: {w}");
    }
    let json = sweep.to_json(&cfg, &metadata(cfg.seed, started));
    write_outputs(&args.out, "outage", &sweep.to_csv(), &json)
}

fn cmd_ergodic(args: &RunArgs) -> Result<(), Failure> {
    let started = unix_now();
    let cfg = load_config(&args.config, &args.overrides, args.oma_split)?;
    let sweep = run_ergodic(&cfg)?;
    let json = sweep.to_json(&cfg, &metadata(cfg.seed, started));
    write_outputs(&args.out, "ergodic", &sweep.to_csv(), &json)
}

fn cmd_sweep(args: &RunArgs) -> Result<(), Failure> {
    let started = unix_now();
    let cfg = load_config(&args.config, &args.overrides, args.oma_split)?;
    let sweep = run_sweep(&cfg)?;
    let json = sweep.to_json(&cfg, &metadata(cfg.seed, started));
    write_outputs(&args.out, "sweep", &sweep.to_csv(), &json)
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let mut opts = ValidationOptions {
        corrupt_b0: args.corrupt_b0,
        ..Default::default()
    };
    if let Some(path) = &args.config {
        let cfg = load_config(path, &args.overrides, false)?;
        opts.radius = cfg.radius_m;
        opts.alpha = cfg.alpha;
        opts.order = cfg.quadrature_n;
        opts.seed = cfg.seed;
        opts.workers = cfg.workers;
    }
    let ov = &args.overrides;
    opts.seed = ov.seed.unwrap_or(opts.seed);
    opts.trials = ov.trials.unwrap_or(opts.trials);
    opts.order = ov.quadrature_n.unwrap_or(opts.order);
    opts.workers = ov.workers.unwrap_or(opts.workers);

    let checks = run_validation(&opts)?;
    print!("{}", format_table(&checks));
    if let Some(out) = &args.out {
        fs::create_dir_all(out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
        let path = out.join("validate.json");
        let body = serde_json::to_string_pretty(&checks).expect("serializable");
        fs::write(&path, body).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    }
    if all_passed(&checks) {
        Ok(())
    } else {
        let failed = checks.iter().filter(|c| !c.passed).count();
        Err(Failure::Check(format!("{failed} check(s) failed")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Outage(a) => cmd_outage(a),
        Cmd::Ergodic(a) => cmd_ergodic(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}
