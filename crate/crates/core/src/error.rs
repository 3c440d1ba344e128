use thiserror::Error;

/// Errors raised by the library. Truncation effects are reported through
/// flags on results, never through this type, except where an operation
/// cannot produce any result at all inside its window.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("distance table is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare { row: usize, got: usize, expected: usize },

    #[error("not a metric: {0}")]
    NotAMetric(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected: vertex {to} is unreachable from vertex {from}")]
    Disconnected { from: usize, to: usize },

    #[error("negative input: {0}")]
    Negative(String),

    #[error("map sends source point {source_point} to {image}, outside a target of {len} points")]
    MapOutOfRange { source_point: usize, image: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid lattice model: {0}")]
    InvalidModel(String),

    #[error("functionals have a common nonzero kernel vector {0:?}")]
    DegenerateKernel(Vec<i64>),

    #[error("scaling law violated at lambda = {lambda}: expected {expected}, got {got}")]
    ScalingViolation { lambda: u64, expected: String, got: String },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("coefficient {coeff} is not a residue modulo {q}")]
    BadCoefficient { coeff: u64, q: u64 },

    #[error("fields differ: q = {0} and q = {1}")]
    FieldMismatch(u64, u64),

    #[error("enumeration of {0} cosets exceeds the configured cap")]
    EnumerationTooLarge(u128),

    #[error("tree would have more than {cap} vertices")]
    TreeTooLarge { cap: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("window contains no interior vertex")]
    NoInterior,

    #[error("vertex map does not preserve adjacency: edge {0}-{1} is sent to non-adjacent {2}-{3}")]
    NotAdjacencyPreserving(usize, usize, usize, usize),

    #[error("action is not transitive: vertex {0} lies outside the orbit of the basepoint")]
    Intransitive(usize),

    #[error("section incomplete: the word reaching {0} cannot be applied to the second basepoint inside the window")]
    SectionIncomplete(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty range")]
    EmptyRange,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
