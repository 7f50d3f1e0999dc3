use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A required column or header is missing or out of order.
    #[error("schema error: {0}")]
    Schema(String),

    /// A field holds a value outside its domain (e.g. a label that is not 0/1).
    #[error("value error: {0}")]
    Value(String),

    /// Two inputs that must be row-aligned are not.
    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("parse error in {source_name} at {location}: {message}")]
    Parse {
        source_name: String,
        location: String,
        message: String,
    },

    #[error("size error: {0}")]
    Size(String),

    /// A resource needed by `module` is missing or unusable.
    #[error("[{module}] resource error: {message}")]
    Resource { module: &'static str, message: String },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("in example {id}: {source}")]
    Example {
        id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        source_name: impl Into<String>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn resource(module: &'static str, message: impl Into<String>) -> Self {
        Error::Resource {
            module,
            message: message.into(),
        }
    }

    /// Strips [`Error::Example`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Example { source, .. } => source.root(),
            other => other,
        }
    }
}
