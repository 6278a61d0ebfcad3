use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph6 (byte {offset}): {reason}")]
    Graph6 { offset: usize, reason: String },
    #[error("graph6 short form encodes at most 62 vertices, graph has {0}")]
    Graph6TooLarge(usize),
    #[error("edge list (line {line}): {reason}")]
    EdgeList { line: usize, reason: String },
    #[error("unknown named graph `{0}`")]
    UnknownName(String),
    #[error("bad graph parameters: {0}")]
    BadParams(String),
    #[error("graph too large: n = {n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("graph is not regular (degrees {min}..{max})")]
    NotRegular { min: usize, max: usize },
    #[error("search budget exceeded after {0} nodes")]
    BudgetExceeded(u64),
    #[error("Jacobi sweep limit ({0}) reached before convergence")]
    NoConvergence(usize),
    #[error("no eigenvalue within {tol:.1e} of {lambda}")]
    NoSuchEigenvalue { lambda: f64, tol: f64 },
    #[error("domain: {0}")]
    Domain(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("covariance matrix is not positive semidefinite ({0})")]
    NotPsd(String),
    #[error("covariance numerically degenerate even with maximal jitter (worst pivot {0:.3e})")]
    Degenerate(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
