//! Library side of the `wulffkit` command-line tool: configuration,
//! the three commands, and their JSON/CSV/OBJ outputs.

mod commands;
pub mod config;

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use commands::{cmd_curvature, cmd_verify, cmd_wulff};
pub use config::{Check, Overrides, RunConfig, ToleranceOverrides, Tolerances};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wulffkit::Error),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl CliError {
    /// Short machine-readable kind, e.g. `ConvexityViolation`.
    pub fn kind(&self) -> String {
        match self {
            Self::Config(_) => "Configuration".into(),
            Self::Write { .. } => "Io".into(),
            Self::Core(e) => {
                let debug = format!("{e:?}");
                debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
            }
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
            message: String,
        }
        let kind = self.kind();
        serde_json::to_string_pretty(&Body { error: &kind, message: self.to_string() }).expect("plain strings serialize")
    }
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Wulff,
    Verify,
    Curvature,
}

/// Loads the config, applies command-line overrides, and runs `command`.
pub fn run(command: Command, config: &Path, overrides: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::load(config)?;
    cfg.apply(overrides);
    match command {
        Command::Wulff => cmd_wulff(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Curvature => cmd_curvature(&cfg),
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Write { path: path.display().to_string(), message: e.to_string() })
}

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Write { path: path.display().to_string(), message: e.to_string() })
}

pub(crate) fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}
