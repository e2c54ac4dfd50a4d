use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid order must be at least 2, got {0}")]
    GridOrder(usize),

    #[error("Newton iteration for LGL node {index} (N = {order}) did not converge")]
    NodeConvergence { index: usize, order: usize },

    #[error("invalid mapping: {0}")]
    Mapping(String),

    #[error("coupling g must be strictly positive, got {0}")]
    Coupling(f64),

    #[error("mapped node {index} has r = {r}; interior nodes must have r > 0")]
    ZeroRadius { index: usize, r: f64 },

    #[error("operator has {operator} interior nodes but the problem grid has {problem}")]
    Dimension { operator: usize, problem: usize },

    #[error("matrix is not symmetric: relative defect {defect:e}")]
    NotSymmetric { defect: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigenvalue iteration stalled at index {index}")]
    EigenConvergence { index: usize },

    #[error("state n_r = {n_r} requested but only {available} eigenvalues were computed")]
    StateIndex { n_r: usize, available: usize },

    #[error("radius {r} lies outside the box [0, {r_max}]")]
    OutsideBox { r: f64, r_max: f64 },

    #[error("cannot parse state label {0:?}")]
    Label(String),

    #[error("reference corpus, line {line}: {message}")]
    Corpus { line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
