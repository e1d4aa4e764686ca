use std::path::PathBuf;

use polybounds_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Parse {
        path: PathBuf,
        message: String,
    },
    Core(CoreError),
    /// A stored construction or a fresh one failed its residual checks.
    Verification(String),
}

impl CliError {
    /// Machine-readable tag printed on failure.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io { .. } => "IOError",
            CliError::Parse { .. } => "ParseError",
            CliError::Core(e) => e.category(),
            CliError::Verification(_) => "VerificationFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(_) => 1,
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Parse { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Verification(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
