//! Command-line harness: configuration parsing, table I/O, synthetic
//! scenario generation, and command dispatch over the core library.

pub mod commands;
pub mod config;
pub mod scenario;
pub mod table;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("run error: {0}")]
    Run(String),
    #[error(transparent)]
    Core(#[from] opcost_core::Error),
}

impl CliError {
    /// Prefix a file path onto a parse error.
    pub fn with_context(self, path: &Path) -> Self {
        match self {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        }
    }
}
