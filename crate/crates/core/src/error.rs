//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dangling source: node {0} has degree 0")]
    DanglingSource(NodeIdRepr),

    #[error("dangling node on walk: node {0} has degree 0")]
    DanglingNode(NodeIdRepr),

    #[error("node index {index} out of range (n = {n})")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("no convergence after {iters} iterations (tol = {tol})")]
    NoConvergence { iters: usize, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty score row for source {0}")]
    EmptyRow(NodeIdRepr),

    #[error("non-finite loss: {0}")]
    NonFiniteLoss(f64),

    #[error("bad file format: {0}")]
    BadFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type NodeIdRepr = u32;
