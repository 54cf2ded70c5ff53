use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: &'static str, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical divergence in neuron {neuron} at t = {t} ms (v = {v}, u = {u})")]
    Divergence { neuron: usize, t: u64, v: f64, u: f64 },

    #[error("internal consistency fault: {0}")]
    Internal(String),

    #[error("malformed registry file: {0}")]
    Registry(String),

    #[error("failed to parse config {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    /// Validation failures (bad config, bad input) as opposed to runtime faults.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Input(_) | Error::ConfigFile { .. } | Error::Registry(_)
        )
    }
}
