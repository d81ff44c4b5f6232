use thiserror::Error;

/// Errors produced anywhere in the sequencing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid residue symbol {0:?}")]
    InvalidResidue(char),
    #[error("invalid peptide: {0}")]
    InvalidPeptide(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("initialisation pool is empty for spectrum {0:?}")]
    EmptyInitPool(String),
    #[error("no results to evaluate")]
    EmptyResults,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
