use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("self-check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Check(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<locdisc::Error> for CliError {
    fn from(e: locdisc::Error) -> Self {
        match e {
            locdisc::Error::Solver(_) | locdisc::Error::NonConvergence(_) => CliError::Solver(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
