//! Graph propagation engine for semi-supervised node classification.
//!
//! The pipeline decouples feature transformation from propagation. Per-node
//! propagation rows are built from push-approximated personalized PageRank,
//! truncated either to a fixed top-`l` or to a per-node `l_i` found by an
//! elbow scan of the score curve. Each row is then reweighted by a learnable
//! convex combination of the PPR scores and row-normalized CoreRank values
//! (sums of neighbor core numbers), and the combined rows drive a shallow
//! MLP classifier.
//!
//! Modules follow the data flow:
//!
//! - [`graph`]: immutable CSR graph storage and edge-list loading
//! - [`kcore`]: k-core decomposition and CoreRank scores
//! - [`ppr`]: forward push, an exact power-iteration oracle, truncation
//! - [`diffusion`]: propagation rows, the gate combination, OT/T&T inference
//! - [`neural`]: MLP, loss, analytic gradients, Adam
//! - [`trainer`]: end-to-end training and evaluation
//! - [`dataset`]: feature/label/split IO and a stochastic block model generator
//!
//! With the `parallel` feature (default) the data-parallel inner loops (row
//! precomputation, power-iteration products, batch forward passes) run on
//! rayon; without it they fall back to sequential iteration with identical
//! results.

pub mod dataset;
pub mod diffusion;
pub mod error;
pub mod graph;
pub mod kcore;
pub mod matrix;
pub mod neural;
mod parallel;
pub mod ppr;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use kcore::CoreScores;
pub use ppr::{PprParams, SparseScoreRow};
