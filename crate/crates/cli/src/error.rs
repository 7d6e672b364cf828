use thiserror::Error;

/// Exit code for malformed input (files, flags, shapes).
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numerical or fitting failures.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: ssgmix::io::FormatError,
    },
    #[error("{0}")]
    Numeric(#[from] ssgmix::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(ssgmix::Error::LabelLengthMismatch { .. }) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
