use std::fmt::Display;
use std::process::ExitCode;

/// A failed command. Usage failures cover bad flags and unreadable or
/// inconsistent inputs; runtime failures happen while simulating or writing.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Runtime(_) => ExitCode::from(1),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

pub trait Classify<T> {
    fn usage_err(self, context: &str) -> CliResult<T>;
    fn runtime_err(self, context: &str) -> CliResult<T>;
}

impl<T, E: Display> Classify<T> for Result<T, E> {
    fn usage_err(self, context: &str) -> CliResult<T> {
        self.map_err(|e| Failure::Usage(format!("{context}: {e}")))
    }

    fn runtime_err(self, context: &str) -> CliResult<T> {
        self.map_err(|e| Failure::Runtime(format!("{context}: {e}")))
    }
}
