use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value failed validation; `field` is a dotted path into the config.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// An expression failed to parse.
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// An iterative or direct solver failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two grids that must coincide do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Prefixes the field path of a configuration error; other variants pass through.
    pub fn in_field(self, prefix: &str) -> Self {
        match self {
            Error::Config { field, message } => Error::Config {
                field: if field.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}.{field}")
                },
                message,
            },
            Error::Domain(m) | Error::Parse { message: m, .. } => Error::Config {
                field: prefix.to_string(),
                message: m,
            },
            other => other,
        }
    }

    /// True for errors that map to exit status 2 (bad input rather than failed verification).
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Parse { .. } | Error::Json(_) | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
