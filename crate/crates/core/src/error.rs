use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file or header could not be decoded; `field` names the offending entry.
    #[error("parse error in `{field}`: {reason}")]
    Parse { field: String, reason: String },

    #[error("invalid coordinates: {0}")]
    Coords(String),

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("patch index {index} out of range (patch count {count})")]
    PatchIndex { index: usize, count: usize },

    #[error("unresolved at all scales")]
    Unresolved,

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("step {index} (`{op}`) failed: {source}")]
    Step {
        index: usize,
        op: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
