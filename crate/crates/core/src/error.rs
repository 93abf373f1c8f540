use std::path::PathBuf;

/// Errors raised while loading inputs or validating operation arguments.
///
/// Infeasible dispatch is never an error: it shows up as unserved energy.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A configuration value is missing or malformed.
    #[error("schema violation at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("trace length mismatch in {trace}: expected {expected} rows, found {found}")]
    TraceLength {
        trace: String,
        expected: usize,
        found: usize,
    },

    /// A candidate decision variable lies outside its bounds.
    #[error("decision variable {variable} = {value} is outside [{min}, {max}]")]
    OutOfBounds {
        variable: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
