use std::fmt;
use std::path::Path;

use chansense::Error;

/// Process exit status, one per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Io = 3,
    Numerical = 4,
    Gate = 5,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Config,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            kind: ExitKind::Io,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

const SINGULAR_HINT: &str = "hint: add a ridge (e.g. --ls.ridge 1e-6) or switch to the \
pseudo-inverse (--ls.method pseudo_inverse)";

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let kind = match &err {
            Error::ExperimentGate { .. } => ExitKind::Gate,
            e if e.is_numerical() => ExitKind::Numerical,
            _ => ExitKind::Config,
        };
        let message = match &err {
            Error::SingularSystem(_) => format!("{err}\n{SINGULAR_HINT}"),
            _ => err.to_string(),
        };
        Self { kind, message }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
