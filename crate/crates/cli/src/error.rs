use thiserror::Error;
use voltrack::Error as CoreError;

pub const EXIT_DATA: u8 = 2;
pub const EXIT_CALIBRATION: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;
pub const EXIT_OTHER: u8 = 1;

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn calibration(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CALIBRATION,
            message: message.into(),
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DEGENERATE,
            message: message.into(),
        }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_OTHER,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Unidentifiable(_) => EXIT_CALIBRATION,
            CoreError::RankDeficient { .. }
            | CoreError::DegeneratePair(_)
            | CoreError::DegenerateParameters(_)
            | CoreError::Singularity { .. } => EXIT_DEGENERATE,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
