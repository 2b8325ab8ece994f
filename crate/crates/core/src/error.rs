use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n too small: {n} (need n >= 16)")]
    NTooSmall { n: usize },

    #[error("degeneracy parameter d = {d} unsupported (need d >= 2)")]
    DegeneracyTooSmall { d: usize },

    #[error("invalid override {name} = {value}: {reason}")]
    InvalidOverride {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("size overflow: host would have {vertices} vertices and ~{expected_edges:.0} expected edges (caps {max_vertices} / {max_edges})")]
    SizeOverflow {
        vertices: usize,
        expected_edges: f64,
        max_vertices: usize,
        max_edges: f64,
    },

    #[error("line {line}: malformed: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("line {line}: vertex index {index} out of range (n = {n})")]
    IndexOutOfRange { line: usize, index: usize, n: usize },

    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    #[error("line {line}: duplicate edge {u} {v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },

    #[error("bad order: {0}")]
    BadOrder(String),

    #[error("guest has {guest} vertices but the host was built for n = {n}")]
    GuestTooLarge { guest: usize, n: usize },

    #[error("delta {delta} outside (0, 3/2)")]
    DeltaOutOfRange { delta: f64 },

    #[error("no valid target: the multiset covers every vertex of block {block}")]
    NoValidTarget { block: usize },

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Precondition,
    Breach,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidRange(_) | Error::InvalidFamily(_) => ErrorClass::Usage,
            Error::InvariantBreach(_) => ErrorClass::Breach,
            _ => ErrorClass::Precondition,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
