use std::fmt;
use std::io;
use std::path::Path;

use semgrad::corpus::CorpusError;
use semgrad::embeddings::EmbeddingError;
use semgrad::experiment::ExperimentError;
use semgrad::skipgram::SkipgramError;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn in_file(path: &Path, err: impl Into<CliError>) -> Self {
        match err.into() {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SkipgramError> for CliError {
    fn from(e: SkipgramError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        match e {
            EmbeddingError::Io(_) => CliError::Io(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io { .. } => CliError::Io(e.to_string()),
            ExperimentError::Embedding(inner) => inner.into(),
            e => CliError::Validation(e.to_string()),
        }
    }
}
