use std::path::Path;

use filtrations::bricks::BrickError;
use filtrations::coupling::ChainError;
use filtrations::sequences::SequenceError;
use filtrations::split_words::SplitWordsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("violation: {0}")]
    Violation(String),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<SequenceError> for CliError {
    fn from(e: SequenceError) -> CliError {
        match e {
            SequenceError::TruncatedHorizon { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<BrickError> for CliError {
    fn from(e: BrickError) -> CliError {
        match e {
            BrickError::Budget(_) => CliError::Budget(e.to_string()),
            BrickError::Invariant { .. } => CliError::Violation(e.to_string()),
            BrickError::BadParameter(_) | BrickError::Incompatible(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> CliError {
        match e {
            ChainError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            ChainError::InconsistentStrategy { .. } => {
                CliError::Violation(format!("strategy rejected before the run: {e}"))
            }
            ChainError::InvalidLaw(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<SplitWordsError> for CliError {
    fn from(e: SplitWordsError) -> CliError {
        match e {
            SplitWordsError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
