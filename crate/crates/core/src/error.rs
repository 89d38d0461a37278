use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty edge at index {index}")]
    EmptyEdge { index: usize },

    #[error("label out of range: edge {index} contains vertex {label} but m = {m}")]
    LabelOutOfRange { index: usize, label: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("domain mismatch: expected {expected} vertices, found {found}")]
    DomainMismatch { expected: usize, found: usize },

    #[error("coloring is not conflict-free for edge {edge}")]
    NotConflictFree { edge: usize },

    #[error("no edge is satisfied by the selected colors")]
    NoSatisfiedEdges,

    #[error("color set is not essential: edge {edge} is not satisfied")]
    NotEssential { edge: usize },

    #[error("selection is not an essential coloring set cover: edge {edge} is not satisfied")]
    NotACover { edge: usize },

    #[error("{what} exceeds limit {limit}")]
    LimitExceeded { what: &'static str, limit: usize },

    #[error("resampling cap exceeded after {attempts} resample events")]
    ResampleCapExceeded { attempts: usize },

    #[error("bucket decomposition needs gamma > e (gamma = {gamma}); use direct coloring")]
    GammaTooSmall { gamma: usize },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("field too small: q = {q} but at least {needed} distinct points are needed")]
    FieldTooSmall { q: u64, needed: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("receiver {receiver} is not satisfied by the encoder")]
    UnsatisfiedReceiver { receiver: usize },

    #[error("missing side information for message {message}")]
    MissingSideInfo { message: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a search or resampling budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::LimitExceeded { .. } | Error::ResampleCapExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
