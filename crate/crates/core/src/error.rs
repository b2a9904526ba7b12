use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid simplex {0:?}: {1}")]
    InvalidSimplex(Vec<usize>, &'static str),

    #[error("embedding is not injective: vertices {0} and {1} share coordinates")]
    NonInjective(usize, usize),

    #[error("embedding mismatch: {0}")]
    EmbeddingMismatch(String),

    #[error("unsupported feature dimension {0}")]
    UnsupportedFeatureDimension(usize),

    #[error("oracle budget exceeded: {vertices} vertices > budget {budget}")]
    OracleBudgetExceeded { vertices: usize, budget: usize },

    #[error("colorings were built with different interners ({0} vs {1})")]
    InternerMismatch(u64, u64),

    #[error("round {round} not available (coloring has depth {depth})")]
    RoundOutOfRange { round: usize, depth: usize },

    #[error("partition did not stabilize within {0} rounds")]
    NoConvergence(usize),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("different abstract complexes: {0}")]
    ComplexMismatch(String),

    #[error("empty quadrature")]
    EmptyQuadrature,

    #[error("unsupported ambient dimension {0}")]
    UnsupportedDimension(usize),

    #[error("unseen input in {location}")]
    UnseenInput { location: String },

    #[error("depth {depth} below complex dimension {dim}")]
    DepthBelowDimension { depth: usize, dim: usize },

    #[error("color {0} does not determine a vertex-coordinate set")]
    Undecodable(u32),

    #[error("{0}")]
    Deformation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("disconnected 1-skeleton")]
    Disconnected,

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    JacobiNoConvergence(usize),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("invalid configuration at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
