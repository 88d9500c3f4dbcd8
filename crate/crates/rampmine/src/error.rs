use std::path::PathBuf;

/// Crate-wide error type.
///
/// Variants are grouped by responsibility so the command line wrapper can
/// map them onto exit codes: everything that stems from user-supplied files
/// or parameters is an input error, the rest is internal.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at line {line}: {msg}")]
    CsvRow { line: u64, msg: String },

    #[error("json error in {path}: {msg}")]
    Json { path: PathBuf, msg: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid lane model: {0}")]
    LaneModel(String),

    #[error("invalid model parameters: {0}")]
    Model(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("non-finite observation at frame {frame}")]
    NonFiniteObservation { frame: usize },

    #[error("trajectory {0} has no lane association on any frame")]
    Unanchored(String),

    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, err: serde_json::Error) -> Self {
        Error::Json { path: path.into(), msg: err.to_string() }
    }

    /// Process exit code for the command line interface: 1 for bad input,
    /// 2 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
