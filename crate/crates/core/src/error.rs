//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The spectral density was evaluated exactly at one of its poles.
    #[error("spectral density is singular at lambda = {lambda}")]
    Singularity { lambda: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("{needed} values exceed the memory budget of {budget}")]
    Capacity { needed: usize, budget: usize },

    /// The transform window asks for samples the series does not have.
    #[error("window needs samples {first}..={last} but the series has {available}")]
    Coverage {
        first: i64,
        last: i64,
        available: usize,
    },

    #[error("series spacing {series_dt} does not match requested delta {delta}")]
    GridMismatch { series_dt: f64, delta: f64 },

    #[error("degenerate schedule: {0}")]
    DegenerateSchedule(String),

    /// Levels whose truncation half-width does not exceed the largest shift.
    #[error("schedule infeasible at levels {levels:?}: theta_j must exceed the largest shift")]
    Feasibility { levels: Vec<u32> },

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable tag used in the `error_code` column of experiment output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Singularity { .. } => "singularity",
            Error::Quadrature { .. } => "quadrature",
            Error::Capacity { .. } => "capacity",
            Error::Coverage { .. } => "coverage",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::DegenerateSchedule(_) => "degenerate_schedule",
            Error::Feasibility { .. } => "feasibility",
            Error::Domain { .. } => "domain",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Parse { .. } => "parse",
            Error::Toml(_) => "toml",
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Config(_)
                | Error::Toml(_)
                | Error::Feasibility { .. }
                | Error::DegenerateSchedule(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
