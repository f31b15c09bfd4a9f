use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("segment {segment} has {len} observations, need at least 2")]
    SegmentTooShort { segment: usize, len: usize },

    #[error("cluster {cluster} pools {count} observations, centroid undefined")]
    CentroidUndefined { cluster: u32, count: usize },

    #[error("eigen solver failed ({reason}) for a={a:?} b={b:?}")]
    Eigen {
        reason: String,
        a: Vec<f64>,
        b: Vec<f64>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Coarse category used for CLI exit codes and error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Eigen { .. } | Error::Numerical(_) | Error::Generation(_) => "numerical",
            Error::Io(_) => "io",
            _ => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
