use std::fmt;

/// Failure class, which decides the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Exit code 1.
    Compute,
    /// Exit code 2: unreadable input, bad config, unwritable output.
    Io,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub stage: &'static str,
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            stage: "config",
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn io(stage: &'static str, message: impl Into<String>) -> Self {
        CliError {
            stage,
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    /// Wraps a library error raised while running `stage`. Parse and I/O
    /// failures count as input errors, everything else as computation.
    pub fn from_core(stage: &'static str, e: gtsa_core::Error) -> Self {
        let kind = match e {
            gtsa_core::Error::Io(_) | gtsa_core::Error::Parse { .. } => ErrorKind::Io,
            _ => ErrorKind::Compute,
        };
        CliError {
            stage,
            kind,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Compute => 1,
            ErrorKind::Io => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}
