use std::path::PathBuf;

use asgc_core::Error as CoreError;

/// Exit status for command-line misuse (set by clap).
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_COMPUTE: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Input { .. } | CliError::Config(_) => EXIT_INPUT,
            CliError::Core(e) => match e {
                CoreError::Io { .. } => EXIT_IO,
                CoreError::Parse { .. }
                | CoreError::Format { .. }
                | CoreError::LabelGap { .. }
                | CoreError::IndexOutOfRange { .. }
                | CoreError::InvalidParameter(_)
                | CoreError::MissingCoverage { .. } => EXIT_INPUT,
                _ => EXIT_COMPUTE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
