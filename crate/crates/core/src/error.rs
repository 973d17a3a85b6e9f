use std::path::PathBuf;

/// Errors produced by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no samples")]
    NoSamples,

    #[error("trace too short: spans {duration} s, needs more than {required} s")]
    TraceTooShort { duration: f64, required: f64 },

    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("manifest field `{field}`: {reason}")]
    Manifest { field: String, reason: String },

    #[error("manifest has no popularity trace; build one with the popularity command first")]
    MissingPopularity,

    #[error("segment {segment} out of range (video has {count} segments)")]
    SegmentOutOfRange { segment: usize, count: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

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
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field,
        reason: reason.into(),
    }
}
