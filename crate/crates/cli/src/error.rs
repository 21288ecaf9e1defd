use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sprint_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use sprint_core::Error as E;
        match self {
            CliError::Core(
                E::Domain(_)
                | E::SingularConfiguration
                | E::StepSize { .. }
                | E::Horizon { .. }
                | E::NonFinite { .. }
                | E::StepBudget { .. },
            )
            | CliError::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}
