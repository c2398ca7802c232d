use std::fmt;
use std::process::ExitCode;

/// Failures of a CLI verb, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad config or arguments; nothing heavy has run. Exit code 2.
    Validation(String),
    /// Gap closed, solver failure, failed oracle, I/O during a run. Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<stredalab::Error> for CliError {
    fn from(e: stredalab::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}
