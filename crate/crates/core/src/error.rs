use thiserror::Error;

/// Failure categories shared by every stage of the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },

    #[error("ordering rule {rule} cannot be satisfied: {reason}")]
    Constraint { rule: String, reason: String },

    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("mapping failed at t = {time:.3} s: {reason}")]
    Mapping { time: f64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{what} parse error at {position}: {reason}")]
    Format {
        what: &'static str,
        position: String,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config/validation, 3 I/O, 4 numeric/mapping.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter { .. } | Error::Constraint { .. } | Error::Config(_) => 2,
            Error::Io { .. } | Error::Format { .. } => 3,
            Error::Numeric(_) | Error::Mapping { .. } => 4,
            Error::Segment { source, .. } => source.exit_code(),
        }
    }
}
