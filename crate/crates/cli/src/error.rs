//! Process-level error classification. Every failure maps onto one of the
//! documented exit codes: 1 golden/acceptance mismatch, 2 configuration
//! error, 3 I/O error.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// A golden value or acceptance check did not match.
    Golden(String),
    /// Bad configuration, arguments, model file contents, or a failure
    /// inside the numeric core (which is always traceable to its inputs).
    Config(String),
    /// The filesystem said no.
    Io(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Golden(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Golden(msg) => write!(f, "mismatch: {msg}"),
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dionet_core::Error> for CliError {
    fn from(e: dionet_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
