//! Library face of the `cornsim` binary: config loading, the end-to-end
//! simulate pipeline, and report consolidation.

pub mod config;
pub mod csvio;
pub mod pipeline;
pub mod report;

use thiserror::Error;

/// Errors grouped by exit code: 1 usage/config, 2 data, 3 numerical.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] config::ConfigError),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<cornsim::ingest::IngestError> for CliError {
    fn from(e: cornsim::ingest::IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<cornsim::trends::TrendsError> for CliError {
    fn from(e: cornsim::trends::TrendsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<cornsim::climate::ClimateError> for CliError {
    fn from(e: cornsim::climate::ClimateError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<cornsim::agronomy::AgronomyError> for CliError {
    fn from(e: cornsim::agronomy::AgronomyError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<cornsim::stats::StatsError> for CliError {
    fn from(e: cornsim::stats::StatsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<cornsim::econ::EconError> for CliError {
    fn from(e: cornsim::econ::EconError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// File-system friendly city name: lowercased, non-alphanumeric runs
/// collapsed to single underscores ("North Bay" → "north_bay").
pub fn city_slug(name: &str) -> String {
    let mut slug = String::with_capacity(name.len());
    let mut pending_sep = false;
    for c in name.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !slug.is_empty() {
                slug.push('_');
            }
            pending_sep = false;
            slug.extend(c.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    slug
}
