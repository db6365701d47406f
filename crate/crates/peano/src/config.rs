//! Experiment configuration: parsing, validation and default materialization.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use peano_core::dynamics::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

pub const DEFAULT_MASTER_SEED: u64 = 20_240_601;
pub const DEFAULT_N_PATHS: u64 = 1000;
pub const DEFAULT_HORIZON: f64 = 1.0;
pub const DEFAULT_CAUCHY_PATHS: u64 = 1_000_000;
pub const WORKERS_ENV: &str = "PEANO_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    SelectProb,
    ExitTime,
    BoxExit,
    Ramp,
    ScalingReport,
    ValidateNoise,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::SelectProb => "select-prob",
            Experiment::ExitTime => "exit-time",
            Experiment::BoxExit => "box-exit",
            Experiment::Ramp => "ramp",
            Experiment::ScalingReport => "scaling-report",
            Experiment::ValidateNoise => "validate-noise",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Worker count: a positive integer or `"auto"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Workers {
    Count(usize),
    Named(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Experiment-specific knobs. Unset values get defaults that depend on ε and
/// are reported with every result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Extras {
    /// Starting point (simulate, exit-time).
    pub x0: Option<f64>,
    /// Half-line barrier (exit-time).
    pub barrier: Option<f64>,
    /// Time budget of the half-line experiment; defaults to `ε^{−α}`.
    pub m: Option<f64>,
    /// Grid step (simulate, select-prob).
    pub step: Option<f64>,
    /// Box exponent ϑ; defaults to ϑ*.
    pub vartheta: Option<f64>,
    /// Replace the stable scale σ (validate-noise negative control).
    pub sigma_override: Option<f64>,
    /// Sample size of the Cauchy point check (validate-noise).
    pub cauchy_paths: Option<u64>,
    #[serde(default)]
    pub record_runtime: bool,
    /// Optional per-path exit record CSV.
    pub records: Option<PathBuf>,
}

/// The configuration file as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub params: ModelParams,
    pub eps_grid: Option<Vec<f64>>,
    pub n_paths: Option<u64>,
    pub horizon: Option<f64>,
    pub master_seed: Option<u64>,
    pub workers: Option<Workers>,
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub extras: Extras,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub params: ModelParams,
    pub eps_grid: Vec<f64>,
    pub n_paths: u64,
    pub horizon: f64,
    pub master_seed: u64,
    pub workers: usize,
    pub output: OutputSpec,
    pub extras: Extras,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn config_err(field: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            config_err(&field_from_serde(&msg), msg)
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Validate and fill in defaults. `env_workers` is the raw value of
    /// `PEANO_WORKERS`, if set.
    pub fn resolve(
        self,
        cli: &CliOverrides,
        env_workers: Option<&str>,
    ) -> Result<ResolvedConfig, HarnessError> {
        let experiment = match (cli.experiment, self.experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(config_err(
                    "experiment",
                    format!("config says {b} but the subcommand is {a}"),
                ))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(config_err("experiment", "no experiment given")),
        };

        let eps_grid = match self.eps_grid {
            Some(g) => g,
            None if self.params.epsilon > 0.0 => vec![self.params.epsilon],
            None => return Err(config_err("eps_grid", "missing and params.epsilon not set")),
        };
        if eps_grid.is_empty() {
            return Err(config_err("eps_grid", "must not be empty"));
        }
        if let Some(e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(config_err("eps_grid", format!("value {e} outside (0, 1)")));
        }
        for &eps in &eps_grid {
            self.params
                .with_epsilon(eps)
                .validate()
                .map_err(|e| config_err(&param_field(&e.to_string()), e.to_string()))?;
        }

        let n_paths = self.n_paths.unwrap_or(DEFAULT_N_PATHS);
        if n_paths < 1 {
            return Err(config_err("n_paths", "must be at least 1"));
        }
        let horizon = self.horizon.unwrap_or(DEFAULT_HORIZON);
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(config_err("horizon", format!("{horizon} must be positive")));
        }

        let workers = match self.workers {
            Some(w) => parse_workers(&w).map_err(|m| config_err("workers", m))?,
            None => match env_workers {
                Some(s) => match s.trim().parse::<usize>() {
                    Ok(n) if n >= 1 => n,
                    _ => {
                        return Err(config_err(
                            WORKERS_ENV,
                            format!("{s:?} is not a positive integer"),
                        ))
                    }
                },
                None => auto_workers(),
            },
        };

        let mut output = self.output.unwrap_or_default();
        if let Some(p) = &cli.out {
            output.path = Some(p.clone());
        }
        if let Some(f) = cli.format {
            output.format = f;
        }

        let mut extras = self.extras;
        check_extras(&mut extras, experiment)?;

        Ok(ResolvedConfig {
            experiment,
            params: self.params.with_epsilon(eps_grid[0]),
            eps_grid,
            n_paths,
            horizon,
            master_seed: cli.seed.or(self.master_seed).unwrap_or(DEFAULT_MASTER_SEED),
            workers,
            output,
            extras,
        })
    }
}

fn auto_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_workers(w: &Workers) -> Result<usize, String> {
    match w {
        Workers::Count(0) => Err("must be at least 1".into()),
        Workers::Count(n) => Ok(*n),
        Workers::Named(s) if s == "auto" => Ok(auto_workers()),
        Workers::Named(s) => Err(format!("{s:?} is neither a count nor \"auto\"")),
    }
}

fn check_extras(x: &mut Extras, experiment: Experiment) -> Result<(), HarnessError> {
    let positive = |name: &str, v: Option<f64>| match v {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(config_err(
            &format!("extras.{name}"),
            format!("{v} must be positive"),
        )),
        _ => Ok(()),
    };
    positive("barrier", x.barrier)?;
    positive("m", x.m)?;
    positive("step", x.step)?;
    positive("sigma_override", x.sigma_override)?;
    if let Some(v) = x.x0 {
        if !v.is_finite() {
            return Err(config_err("extras.x0", "must be finite"));
        }
    }
    if let Some(v) = x.vartheta {
        if !(v > 0.0 && v <= 1.0) {
            return Err(config_err("extras.vartheta", format!("{v} outside (0, 1]")));
        }
    }
    if x.cauchy_paths == Some(0) {
        return Err(config_err("extras.cauchy_paths", "must be at least 1"));
    }
    if experiment == Experiment::ValidateNoise {
        x.cauchy_paths.get_or_insert(DEFAULT_CAUCHY_PATHS);
    }
    Ok(())
}

/// Map a parameter validation message to the config field it concerns.
fn param_field(msg: &str) -> String {
    let body = msg.strip_prefix("domain error: ").unwrap_or(msg);
    let name = body.split([' ', '=']).next().unwrap_or("");
    match name {
        "epsilon" => "eps_grid".into(),
        "alpha" | "beta_plus" | "beta_minus" | "B_plus" | "B_minus" | "c" => {
            format!("params.{name}")
        }
        _ => "params".into(),
    }
}

/// Pull the offending field name out of a serde error message.
fn field_from_serde(msg: &str) -> String {
    for marker in ["missing field `", "unknown field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    if msg.contains("unknown variant") {
        return "experiment".into();
    }
    "config".into()
}
