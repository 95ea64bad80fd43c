//! Command-line front end: configuration, presets, CSV output and sweeps.

// `!(x > y)` is the NaN-rejecting form used for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;
use crate::config::{ConfigError, RunConfig, SweepAnalysis};
use crate::output::{render, Table};

#[derive(Debug, Parser)]
#[command(
    name = "qfridge",
    version,
    about = "Periodically driven quantum refrigerator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Floquet coefficients of the system Green function.
    Floquet(Common),
    /// Heat currents per reservoir and process, and the work rate.
    Currents(Common),
    /// Steady occupancy and optimal drive frequency.
    Limits(Common),
    /// Emission spectrum and photon rates.
    Spectrum(Common),
    /// Limits or currents over a grid of configuration values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=start:stop:count` over a dotted configuration key; repeatable.
        #[arg(long = "axis", value_name = "AXIS")]
        axes: Vec<String>,
        #[arg(long, value_enum)]
        analysis: Option<AnalysisArg>,
    },
    /// Cross-check against the closed-system simulation.
    Validate(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AnalysisArg {
    Limits,
    Currents,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; keys override those of `--preset`.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
    pub preset: Option<String>,
    /// Write `<DIR>/<command>.csv` instead of standard output.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
}

/// Recursively overlays `top` onto `base`.
fn merge(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Preset and file merged into one validated configuration.
pub fn load(common: &Common) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
            Some(text)
        }
        None => None,
    };
    let mut cfg = match (&common.preset, file) {
        (None, None) => {
            return Err(
                ConfigError::new("--config", "either --config or --preset is required").into(),
            )
        }
        (None, Some(text)) => RunConfig::parse(&text)?,
        (Some(name), None) => presets::preset(name)?,
        (Some(name), Some(text)) => {
            let top: toml::Value = toml::from_str(&text)
                .map_err(|e| ConfigError::new("", e.to_string().trim_end().to_string()))?;
            let mut base = presets::preset(name)?.to_value();
            merge(&mut base, top);
            RunConfig::from_value(base)?
        }
    };
    if let Some(tol) = common.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(ConfigError::new("--tol", format!("must lie in (0, 1), got {tol}")).into());
        }
        cfg.tolerances.quadrature = tol;
    }
    if common.jobs == Some(0) {
        return Err(ConfigError::new("--jobs", "must be at least 1").into());
    }
    Ok(cfg)
}

fn emit(name: &str, common: &Common, cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let text = render(name, cfg, table);
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join(format!("{name}.csv")), text)?;
        }
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

/// Runs one invocation; the error carries the exit code.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Floquet(c) => {
            let cfg = load(&c)?;
            emit("floquet", &c, &cfg, &commands::floquet(&cfg)?)
        }
        Command::Currents(c) => {
            let cfg = load(&c)?;
            emit("currents", &c, &cfg, &commands::currents(&cfg)?)
        }
        Command::Limits(c) => {
            let cfg = load(&c)?;
            emit("limits", &c, &cfg, &commands::limits(&cfg)?)
        }
        Command::Spectrum(c) => {
            let cfg = load(&c)?;
            emit("spectrum", &c, &cfg, &commands::spectrum(&cfg)?)
        }
        Command::Sweep {
            common,
            axes,
            analysis,
        } => {
            let mut cfg = load(&common)?;
            if !axes.is_empty() {
                cfg.sweep.axes = axes;
            }
            if let Some(a) = analysis {
                cfg.sweep.analysis = match a {
                    AnalysisArg::Limits => SweepAnalysis::Limits,
                    AnalysisArg::Currents => SweepAnalysis::Currents,
                };
            }
            let parsed = cfg
                .sweep
                .axes
                .iter()
                .map(|s| sweep::parse_axis(s))
                .collect::<Result<Vec<_>, _>>()?;
            let table = sweep::sweep(&cfg, &parsed, cfg.sweep.analysis, common.jobs)?;
            emit("sweep", &common, &cfg, &table)
        }
        Command::Validate(c) => {
            let cfg = load(&c)?;
            let (table, report) = commands::validate(&cfg)?;
            for check in &report.checks {
                eprintln!(
                    "{} {}: value {} reference {} deviation {} tolerance {}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    output::fmt_f64(check.value),
                    output::fmt_f64(check.reference),
                    output::fmt_f64(check.deviation()),
                    output::fmt_f64(check.tolerance)
                );
            }
            emit("validate", &c, &cfg, &table)?;
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name)
                    .collect();
                Err(CliError::Validation(failed.join(", ")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys_override_preset() {
        let mut base = presets::preset("sideband").unwrap().to_value();
        let top: toml::Value = toml::from_str("[system]\ngamma = 2e-5\n").unwrap();
        merge(&mut base, top);
        let cfg = RunConfig::from_value(base).unwrap();
        assert_eq!(cfg.system.gamma, 2e-5);
        assert_eq!(cfg.system.omega0, 1.0);
    }
}
