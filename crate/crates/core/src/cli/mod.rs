//! Configuration-driven front end: scenario presets, parameter sweeps,
//! validation, and deterministic CSV/JSON tables.
//!
//! ```no_run
//! use molcav::cli::{run_config, ScenarioConfig};
//!
//! let cfg = ScenarioConfig::parse("scenario = fig2\n")?;
//! let tables = run_config(&cfg, 1)?;
//! assert_eq!(tables[0].name, "fig2");
//! # Ok::<(), molcav::Error>(())
//! ```

mod config;
mod output;
mod scenarios;

use std::collections::VecDeque;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

pub use config::{
    CutoffChoice, DissipationGroup, OutputFormat, OutputSettings, ScanSettings, Scenario, ScenarioConfig, SweepAxis,
    TimeGrid, WignerSettings, BACKGROUND_RATE, CUSTOM_REQUIRED, DISSIPATION_GRID, FIG8_OMEGA_C, KEYS,
};
pub use output::{format_significant, write_tables, Column, Manifest, OutputTable, ResolvedPoint};
pub use scenarios::AUTO_TAIL;

use crate::error::{Error, Result};
use crate::model::{derive_effective, rwa_report, suggested_cutoffs, truncation_report};
use crate::hilbert::FockCutoffs;
use crate::report::ValidationReport;

/// Largest density-matrix dimension accepted without a memory warning.
const LARGE_DENSITY_DIM: usize = 2000;

fn settings_report(cfg: &ScenarioConfig, r: &mut ValidationReport) {
    let it = &cfg.integrator;
    if let Some(h) = it.step {
        if !(h > 0.0 && h.is_finite()) {
            r.error("nonpositive", "integrator.step", format!("must be positive, got {h}"));
        }
    }
    for (key, v) in [
        ("integrator.steps_per_period", it.steps_per_period),
        ("integrator.rel_tol", it.rel_tol),
        ("integrator.abs_tol", it.abs_tol),
        ("monitors.norm_drift_rate", it.monitors.norm_drift_rate),
        ("monitors.trace_drift_rate", it.monitors.trace_drift_rate),
        ("monitors.top_population", it.monitors.top_population),
        ("monitors.positivity", it.monitors.positivity),
        ("time.periods", cfg.time.periods),
        ("wigner.extent", cfg.wigner.extent),
        ("scan.ratio", cfg.scan.ratio),
        ("scan.xi_max", cfg.scan.xi_max),
        ("scan.xi_step", cfg.scan.xi_step),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            r.error("nonpositive", key, format!("must be positive, got {v}"));
        }
    }
    for (key, v, min) in [
        ("time.points_per_period", cfg.time.points_per_period, 1),
        ("wigner.points", cfg.wigner.points, 2),
        ("analysis.negativity_stride", cfg.negativity_stride, 1),
        ("output.precision", cfg.output.precision, 1),
    ] {
        if v < min {
            r.error("too-small", key, format!("must be at least {min}, got {v}"));
        }
    }
    if cfg.output.precision > 17 {
        r.error("too-large", "output.precision", "at most 17 significant digits are meaningful");
    }
    if cfg.scan.omega_c.is_empty() {
        r.error("empty", "scan.omega_c", "at least one value is required");
    }
    if cfg.scenario.simulates() && (cfg.time.periods * cfg.time.points_per_period as f64).round() < 1.0 {
        r.error("empty", "time.periods", "the time grid has no samples");
    }
}

fn tagged(mut sub: ValidationReport, tag: &str) -> ValidationReport {
    if !tag.is_empty() {
        for d in &mut sub.diagnostics {
            d.message = format!("[{tag}] {}", d.message);
        }
    }
    sub
}

fn points_report(cfg: &ScenarioConfig, sweep: &str, r: &mut ValidationReport) {
    for (label, model) in cfg.model_points() {
        let tag = [sweep, label.as_str()].iter().filter(|s| !s.is_empty()).copied().collect::<Vec<_>>().join(",");
        let checked = model.check();
        if checked.has_errors() {
            r.extend(tagged(checked, &tag));
            continue;
        }
        let e = match derive_effective(&model) {
            Ok(e) => e,
            Err(err) => {
                r.error("underivable", "model", format!("{}{err}", if tag.is_empty() { String::new() } else { format!("[{tag}] ") }));
                continue;
            }
        };
        r.extend(tagged(rwa_report(&model, &e), &tag));
        let auto = match suggested_cutoffs(&e, AUTO_TAIL) {
            Ok(c) => c,
            Err(err) => {
                r.error("cutoffs", "cutoffs", format!("[{tag}] {err}"));
                continue;
            }
        };
        let c = &cfg.cutoffs;
        let resolved = FockCutoffs {
            n_a_max: c.n_a_max.unwrap_or(auto.n_a_max),
            n_b_max: c.n_b_max.unwrap_or(auto.n_b_max),
        };
        if let Err(err) = resolved.validate() {
            r.error("cutoffs", "cutoffs", err.to_string());
            continue;
        }
        r.extend(tagged(truncation_report(&e, &resolved), &tag));
        let dim = 2 * resolved.two_mode_dim();
        if cfg.scenario.simulates() && model.has_dissipation() && dim > LARGE_DENSITY_DIM {
            r.warn(
                "large-state",
                "cutoffs",
                format!("[{tag}] density matrix of dimension {dim} needs several GiB and hours per period"),
            );
        }
    }
}

/// Hard errors and warnings for a configuration, covering every sweep and
/// scan point.
pub fn validate(cfg: &ScenarioConfig) -> ValidationReport {
    let mut r = ValidationReport::new();
    if cfg.scenario == Scenario::Custom {
        for key in CUSTOM_REQUIRED {
            let swept = format!("sweep.{key}");
            if !cfg.explicit.iter().any(|k| k == key || *k == swept) {
                r.error("missing-field", *key, "a custom scenario must set this key");
            }
        }
    }
    match cfg.expand_sweep() {
        Err(e) => r.error("sweep", "sweep", e.to_string()),
        Ok(runs) => {
            for (label, c) in &runs {
                let mut sub = ValidationReport::new();
                settings_report(c, &mut sub);
                points_report(c, label, &mut sub);
                r.extend(sub);
            }
        }
    }
    let mut seen = Vec::new();
    r.diagnostics.retain(|d| {
        let dup = seen.contains(d);
        if !dup {
            seen.push(d.clone());
        }
        !dup
    });
    r
}

type Job = (String, scenarios::Task);

fn execute(jobs: Vec<Job>, threads: usize) -> Vec<Option<(String, Result<Vec<OutputTable>>)>> {
    let n = jobs.len();
    let queue = Mutex::new(jobs.into_iter().enumerate().collect::<VecDeque<_>>());
    let results = Mutex::new((0..n).map(|_| None).collect::<Vec<_>>());
    let failed = AtomicBool::new(false);
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let next = queue.lock().expect("queue lock").pop_front();
                let Some((i, (name, task))) = next else { break };
                let out = task();
                if out.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                results.lock().expect("result lock")[i] = Some((name, out));
            });
        }
    });
    results.into_inner().expect("result lock")
}

/// Validates and runs a configuration, returning its tables in a
/// deterministic order. Independent simulations run on up to `threads`
/// worker threads.
pub fn run_config(cfg: &ScenarioConfig, threads: usize) -> Result<Vec<OutputTable>> {
    let report = validate(cfg);
    if report.has_errors() {
        return Err(Error::Validation(report.to_string().trim_end().to_string()));
    }
    let mut jobs: Vec<Job> = Vec::new();
    for (label, c) in cfg.expand_sweep()? {
        let name = if label.is_empty() {
            c.scenario.name().to_string()
        } else {
            format!("{} [{label}]", c.scenario.name())
        };
        for task in scenarios::tasks(&c, &label)? {
            jobs.push((name.clone(), task));
        }
    }
    let mut tables = Vec::new();
    for slot in execute(jobs, threads) {
        // Skipped jobs only occur after a failure, which is reported first.
        let Some((scenario, out)) = slot else { continue };
        match out {
            Ok(t) => tables.extend(t),
            Err(e) => {
                return Err(Error::Scenario {
                    scenario,
                    source: Box::new(e),
                })
            }
        }
    }
    scenarios::merge(tables)
}

/// Molecular cavity cat-state simulator.
#[derive(Debug, Parser)]
#[command(name = "molcav", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format, overriding `output.format`.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Worker threads for independent simulations.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Reserved: the tool uses no random numbers, so this is rejected.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its tables.
    Run { config: PathBuf },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// List the scenario presets.
    ListScenarios,
}

fn load(path: &PathBuf, cli: &Cli) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::parse(&text)?;
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(f) = &cli.format {
        cfg.output.format = f.parse().map_err(Error::Validation)?;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if cli.seedless {
        return Err(Error::Validation(
            "--seedless is reserved: no random numbers are used, so there is no seed to drop".into(),
        ));
    }
    if cli.threads == 0 {
        return Err(Error::Validation("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::ListScenarios => {
            for s in Scenario::ALL {
                writeln!(out, "{:<8} {}", s.name(), s.summary())?;
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load(config, cli)?;
            let report = validate(&cfg);
            write!(out, "{report}")?;
            let (e, w) = (report.errors().count(), report.warnings().count());
            writeln!(out, "{e} error(s), {w} warning(s)")?;
            if e > 0 {
                return Err(Error::Validation(format!("{} has {e} error(s)", config.display())));
            }
            Ok(())
        }
        Command::Run { config } => {
            let cfg = load(config, cli)?;
            let report = validate(&cfg);
            write!(err, "{report}")?;
            let tables = run_config(&cfg, cli.threads)?;
            let paths = write_tables(&tables, &cfg.output.directory, cfg.output.format, cfg.output.precision)?;
            write!(out, "{}", output::summary(&tables))?;
            for p in paths {
                writeln!(out, "wrote {}", p.display())?;
            }
            Ok(())
        }
    }
}

/// Parses `args` and executes the command. Returns the process exit code:
/// 0 on success, 1 for usage or validation errors, 2 for runtime failures.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
