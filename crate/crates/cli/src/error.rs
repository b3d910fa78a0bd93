use std::fmt;
use std::io;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// The run finished but a check failed.
    Validation(String),
    /// Bad flags, config or model parameters.
    Usage(String),
    Param(ruinlab::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) | CliError::Param(_) => 2,
            CliError::Io(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Param(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ruinlab::Error> for CliError {
    fn from(e: ruinlab::Error) -> Self {
        CliError::Param(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}
