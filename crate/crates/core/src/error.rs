use thiserror::Error;

/// Errors produced by the geometry pipeline and its scores.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("duplicate sites at indices {first} and {second}")]
    DuplicateSite { first: usize, second: usize },

    #[error("minimum-norm solver hit {iterations} iterations (gap {gap:e})")]
    MaxIterations { iterations: usize, gap: f64 },

    #[error("the pruned Delaunay graph has no edges")]
    EmptyGraph,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{metric} requires equal cardinalities, got {left} and {right}")]
    CardinalityMismatch {
        metric: &'static str,
        left: usize,
        right: usize,
    },

    #[error("tree depth {0} outside the supported range 2..=12")]
    DepthOutOfRange(usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero variance in correlation input")]
    ZeroVariance,

    #[error("{0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
