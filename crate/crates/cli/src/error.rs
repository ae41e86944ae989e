use std::path::Path;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<arbound_core::Error> for CliError {
    fn from(err: arbound_core::Error) -> Self {
        match err {
            arbound_core::Error::InfeasiblePlan { .. } => CliError::Infeasible(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
