use std::fmt;

use pwlnn::PwlError;

/// Process exit codes.
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_FIT: u8 = 3;
pub const EXIT_NOT_REPRESENTABLE: u8 = 4;
pub const EXIT_VIOLATIONS: u8 = 5;
pub const EXIT_BUDGET: u8 = 6;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Fit(String),
    NotRepresentable(String),
    /// Findings were already printed; only the exit status remains.
    Violations,
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Input(_) => EXIT_INPUT,
            Self::Fit(_) => EXIT_FIT,
            Self::NotRepresentable(_) => EXIT_NOT_REPRESENTABLE,
            Self::Violations => EXIT_VIOLATIONS,
            Self::Budget(_) => EXIT_BUDGET,
        }
    }

    /// Classifies an error raised by a fitting or transform step.
    pub fn compute(e: PwlError) -> Self {
        match e {
            PwlError::InvalidConfig(m) => Self::Usage(m),
            PwlError::InvalidData(_) | PwlError::DimensionMismatch { .. } | PwlError::Parse { .. } => {
                Self::Input(e.to_string())
            }
            PwlError::NotCplrRepresentable { .. } => Self::NotRepresentable(e.to_string()),
            PwlError::BudgetExceeded { .. } => Self::Budget(e.to_string()),
            other => Self::Fit(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Input(m) | Self::Fit(m) | Self::NotRepresentable(m) | Self::Budget(m) => {
                f.write_str(m)
            }
            Self::Violations => f.write_str("violations found"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
