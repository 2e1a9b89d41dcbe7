use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// All samples identical, or otherwise no spread to fit.
    #[error("singular data: {0}")]
    SingularData(String),

    #[error("numerical singularity in {context}")]
    NumericalSingularity { context: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("parse error in {path}{}: {message}", .line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },

    /// A controller failed during an episode.
    #[error("tick {tick}: {source}")]
    AtTick {
        tick: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn singular(context: impl Into<String>) -> Self {
        Error::NumericalSingularity {
            context: context.into(),
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: msg.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalSingularity { .. } | Error::SingularData(_) => true,
            Error::AtTick { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
