use std::path::PathBuf;

/// Errors raised by the codecs, the lab and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("element {value} lies outside the domain [{lo}, {hi}]")]
    DomainViolation { value: f64, lo: f64, hi: f64 },

    #[error("non-finite element {0}")]
    NonFiniteElement(f64),

    #[error("invalid domain [{lo}, {hi}]: bounds must be finite with lo < hi")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("root recovery failed: {0}")]
    RootRecoveryFailure(String),

    #[error("latent vector is outside the image of the encoder: {0}")]
    OutOfImage(String),

    #[error("malformed latent: {0}")]
    MalformedLatent(String),

    #[error("index {index} outside universe of size {universe}")]
    IndexOutOfUniverse { index: u64, universe: u64 },

    #[error("duplicate index {0} in a set encoding")]
    DuplicateIndex(u64),

    #[error("value is not in the image of the encoder: {0}")]
    NotInImage(String),

    #[error("input must be non-zero")]
    ZeroInput,

    #[error("operation requires a non-empty set")]
    EmptySet,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training diverged at batch {batch}: loss {loss}")]
    NumericalDivergence { batch: usize, loss: f64 },

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
