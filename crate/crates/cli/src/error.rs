use std::fmt;
use std::process::ExitCode;

use rach_core::allocator::AllocError;
use rach_core::analytics::AnalyticsError;
use rach_core::model::ModelError;
use rach_core::simulator::SimError;

/// Exit codes. Usage errors exit with clap's code 2.
pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_OVERLOAD: u8 = 4;
pub const EXIT_SIMULATION: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Validation(String),
    Overload(String),
    Simulation(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Overload(_) => EXIT_OVERLOAD,
            CliError::Simulation(_) => EXIT_SIMULATION,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Validation(m) | CliError::Overload(m) | CliError::Simulation(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AllocError> for CliError {
    fn from(e: AllocError) -> Self {
        if e.is_overload() {
            CliError::Overload(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Layout(m) => CliError::Validation(m.to_string()),
            other => CliError::Simulation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
