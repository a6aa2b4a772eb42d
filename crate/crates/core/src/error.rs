//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {vertex} has zero out-degree; use a Google-matrix or rank-one ergodicization")]
    DanglingNode { vertex: usize },

    #[error("graph is not strongly connected ({n_components} components); take the largest strongly connected subgraph or apply a Google-matrix / rank-one ergodicization")]
    NotStronglyConnected { n_components: usize },

    #[error("stationary distribution did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("stationary distribution is degenerate (min entry {min_entry:.3e})")]
    DegenerateStationary { min_entry: f64 },

    #[error("operator is numerically non-diagonalizable (reconstruction residual {residual:.3e}, eigenbasis condition {cond:.3e})")]
    NonDiagonalizable { residual: f64, cond: f64 },

    #[error("frequency group contains no conjugate eigenvalue pair")]
    NoConjugatePair,

    #[error("matrix expected to be real has imaginary residual {residual:.3e} ({context})")]
    ImaginaryResidual {
        residual: f64,
        context: &'static str,
    },

    #[error("signal model normal equations are singular: {0}")]
    SingularModel(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("column selection produced an empty basis at scale {scale}")]
    EmptyBasis { scale: usize },

    #[error("wavelet transform stack is rank deficient")]
    SingularTransform,

    #[error("filter bank design is invalid: {0}")]
    DesignInvalid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("failed to parse {path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
