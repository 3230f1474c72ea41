use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric: |M[{row},{col}] - M[{col},{row}]| = {deviation:e}")]
    SymmetryViolation {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid k = {k} for n = {n} points (need 1 <= k < n)")]
    InvalidK { k: usize, n: usize },

    #[error("all weights are zero")]
    DegenerateWeights,

    #[error("degenerate neighborhood at point {0}: every neighbor weight is zero")]
    DegenerateNeighborhood(usize),

    #[error("node {target} is unreachable from node {from}; repair connectivity first")]
    Unreachable { from: usize, target: usize },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("labels are required but the dataset has none")]
    MissingLabels,

    #[error("labeled subset has {got} points but k = {k} needs at least {}", k + 1)]
    InsufficientSubset { got: usize, k: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error(
        "support of size {size} exceeds the exact solver cap of {cap}; use sinkhorn or sliced"
    )]
    SupportTooLarge { size: usize, cap: usize },

    #[error("Gibbs kernel underflow at epsilon = {epsilon:e}; increase epsilon or use the log-domain solver")]
    NumericalUnderflow { epsilon: f64 },

    #[error("kernel matrix is degenerate: all eigenvalues <= 1e-12")]
    DegenerateKernel,

    #[error("transport on edge ({i}, {j}) failed: {source}")]
    Edge {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
