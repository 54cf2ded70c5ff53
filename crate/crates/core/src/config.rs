//! Sectioned `key = value` config files.
//!
//! ```toml
//! [network]
//! connection_prob = 0.07
//! seed = 7
//!
//! [stimulus]
//! width = 1
//!
//! [detector]
//! width = 32
//!
//! [experiment]
//! direction_ms = 10000
//! ```
//!
//! Missing keys keep their defaults and unknown keys are rejected.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;

pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::ConfigFile {
        path: origin.to_path_buf(),
        message: e.message().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text, path)
}

/// The full configuration in file form, every key spelled out.
pub fn to_config_text(config: &ExperimentConfig) -> String {
    toml::to_string(config).expect("config is always representable")
}
