use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] qite_core::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Process exit status: 1 for numerical aborts, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Numerical(e) if !is_input_error(e) => 1,
            _ => 2,
        }
    }
}

fn is_input_error(e: &qite_core::Error) -> bool {
    use qite_core::Error as E;
    matches!(
        e,
        E::QubitMismatch { .. }
            | E::IndexOutOfRange { .. }
            | E::InvalidArgument(_)
            | E::EmptyPool
            | E::DenseLimit { .. }
    )
}

pub type Result<T> = std::result::Result<T, Error>;
