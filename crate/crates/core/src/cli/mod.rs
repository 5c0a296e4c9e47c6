//! Experiment runner: configuration, CSV emission, Lyapunov reporting and
//! the full reproduction sweep. The `roundavg` binary is a thin clap layer
//! over these functions.

mod commands;
mod config;
mod csvio;
mod report;

pub use commands::{
    analyze_series, cmd_lyapunov, cmd_reproduce, cmd_simulate, logistic_series, resolve_backend, simulate,
    BuiltinSeries, LyapunovReport, LyapunovSettings, LyapunovSource, SeriesAnalysis, SimulateSummary, Simulation,
};
pub use config::{ExperimentConfig, FilterSwitch};
pub use csvio::{read_table, write_filtered, write_traditional, SeriesTable, FILTERED_HEADER, TRADITIONAL_HEADER};
pub use report::{
    CellResult, ReproductionReport, ReproductionRow, FILTERED_LAMBDA_MAX, PERIODIC_PEAK_MIN, PUBLISHED_EXPONENTS,
};

use thiserror::Error;

use crate::lyapunov::LyapunovError;
use crate::orbits::OrbitError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("acceptance criteria not met: {0}")]
    CriteriaUnmet(String),
}

impl CliError {
    /// 1 usage/config, 2 data, 3 criteria unmet.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) | CliError::Data(_) | CliError::Lyapunov(_) | CliError::Orbit(_) => 2,
            CliError::CriteriaUnmet(_) => 3,
        }
    }
}
