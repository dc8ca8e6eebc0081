//! Command-line front end: configuration, scenarios, CSV and SVG output.
//!
//! A run is computed entirely in memory and written only once it finished,
//! so a configuration error leaves the output directory untouched.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod config;
mod ensemble_file;
pub mod output;
mod scenarios;
mod svg;

pub use config::{RunConfig, Scenario, KEYS};
pub use ensemble_file::{format_ensemble, parse_ensemble, parse_ensemble_file};
pub use output::{num, Artifacts, Table};
pub use scenarios::{run, FLAG_CONSISTENT, FLAG_VIOLATION};

use crate::error::{Error, Result};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CLAUSIUS_LAB_THREADS";

pub const EXIT_OK: i32 = 0;
/// Some rows failed numerically (or a Clausius total was violated).
pub const EXIT_NUMERICAL: i32 = 1;
/// Bad configuration or input; nothing was written.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "clausius-lab",
    version,
    about = "Strong-coupling thermodynamics of a damped quantum oscillator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Path nodes (sweep, violation-scan, resolve) or search resolution (holevo).
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,

    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,

    /// Also write an SVG line plot.
    #[arg(long, global = true)]
    pub svg: bool,

    /// Seed for randomized measurement checks.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Override any configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Equilibrium moments and entropy over a parameter grid.
    Moments,
    /// Finite-bath convergence study against the continuum moments.
    Oracle,
    /// Entropy and heat along a mass or damping path.
    Sweep,
    /// Mass step alone over a grid, flagging apparent Clausius violations.
    ViolationScan,
    /// Coupling step followed by the mass step.
    Resolve,
    /// Holevo quantity, accessible information and erasure budget of an ensemble.
    Holevo,
    /// Run the scenario named in the configuration file.
    Run,
}

impl Command {
    fn scenario(self) -> Option<Scenario> {
        match self {
            Command::Moments => Some(Scenario::Moments),
            Command::Oracle => Some(Scenario::Oracle),
            Command::Sweep => Some(Scenario::Sweep),
            Command::ViolationScan => Some(Scenario::ViolationScan),
            Command::Resolve => Some(Scenario::Resolve),
            Command::Holevo => Some(Scenario::Holevo),
            Command::Run => None,
        }
    }
}

/// Config file first, then flags on top.
pub fn resolve_config(cli: &Cli) -> Result<(RunConfig, Scenario)> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v, 0)?;
    }
    let scenario = match cli.command.scenario() {
        Some(s) => s,
        None => cfg
            .scenario
            .ok_or_else(|| Error::Config("`run` needs `scenario = ...` in the configuration".into()))?,
    };
    cfg.scenario = Some(scenario);
    if let Some(d) = &cli.out {
        cfg.out = d.clone();
    }
    if let Some(n) = cli.grid {
        match scenario {
            Scenario::Holevo => cfg.effort = n,
            _ => cfg.grid_points = n,
        }
    }
    cfg.bits |= cli.bits;
    cfg.svg |= cli.svg;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok((cfg, scenario))
}

/// Reads the thread cap; `None` when unset.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
    }
}

/// Whole CLI run; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let (cfg, scenario) = match resolve_config(&cli).and_then(|c| {
        if let Some(n) = thread_cap()? {
            // Fails only if a pool already exists, which then keeps its size.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(c)
    }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let artifacts = match run(&cfg, scenario) {
        Ok(a) => a,
        Err(e @ (Error::Parse { .. } | Error::Config(_) | Error::Io(_) | Error::InvalidParameter { .. })) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    if let Err(e) = artifacts.write(&cfg.out) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    for line in &artifacts.summary {
        println!("{scenario}: {line}");
    }
    for (name, _) in &artifacts.files {
        println!("wrote {}", cfg.out.join(name).display());
    }
    if artifacts.failures > 0 {
        eprintln!("error: {} row(s) failed; see the status column", artifacts.failures);
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}
