//! Command-line front end for `hypmass`: mass computations, residual
//! verification, gluing scans, constraint sweeps and a boost demo, driven
//! by JSON config files and producing JSON reports plus CSV tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::fmt;
use std::path::Path;

pub use config::{ConfigError, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const TOLERANCE: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const DIVERGENCE: u8 = 4;
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(std::io::Error),
    Numerical(hypmass::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<hypmass::Error> for CliError {
    fn from(e: hypmass::Error) -> Self {
        use hypmass::Error as E;
        match e {
            // parameters that come straight from the config file
            E::InvalidParameter(_)
            | E::UnsupportedDimension(_)
            | E::DimensionMismatch { .. }
            | E::ChartMismatch { .. }
            | E::Superluminal { .. }
            | E::NotSpacelike { .. }
            | E::ConstructionFailed { .. }
            | E::NotKilling { .. } => CliError::Config(ConfigError::Invalid(e.to_string())),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => exit::CONFIG,
            CliError::Numerical(_) => exit::DIVERGENCE,
        }
    }
}

/// What a command produced: the JSON report, CSV tables keyed by file name,
/// and the exit code it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: String,
    pub tables: Vec<(String, String)>,
    pub exit_code: u8,
}

impl Output {
    /// Writes `report.json` and the tables into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), &self.report)?;
        for (name, body) in &self.tables {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

/// Loads a config file, or the defaults when no path is given, then applies
/// command-line overrides.
pub fn load_config(
    path: Option<&Path>,
    dim: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(n) = dim {
        cfg.dim = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}
