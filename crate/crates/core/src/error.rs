use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("point sequence is empty")]
    EmptySequence,
    #[error("a curve needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("curve edge {edge} has zero length")]
    ZeroLengthEdge { edge: usize },
    #[error("invalid interval ({lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("start point lies outside the disk")]
    OutsideDisk,
    #[error("bisector of two identical points is undefined")]
    CoincidentPoints,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gave up after {retries} restarts: {last}")]
    RetriesExhausted { retries: u32, last: String },
    /// Raised inside one attempt of a randomized optimizer; triggers a restart.
    #[error("attempt failed: {0}")]
    AttemptFailed(String),
    #[error("malformed cover: {0}")]
    MalformedCover(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
