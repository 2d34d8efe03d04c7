//! Crate-wide error type.

use crate::estimators::ResamplingReport;

/// Convenience alias used by all fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An edge-list line could not be parsed as two vertex ids.
    #[error("{path}:{line}: malformed edge list entry: {reason}")]
    MalformedEdgeList {
        path: String,
        line: usize,
        reason: String,
    },

    /// The input contained no usable edges at all.
    #[error("edge set is empty")]
    EmptyEdgeSet,

    /// Component extraction found nothing of at least two vertices.
    #[error("largest connected component has fewer than 2 vertices")]
    ComponentTooSmall,

    /// An operation that requires a connected graph received a disconnected one.
    #[error("graph is not connected")]
    Disconnected,

    #[error("vertex {0} is out of range")]
    VertexOutOfRange(u32),

    /// Monitor/target selections must be duplicate-free and disjoint.
    #[error("sources and targets must be distinct and mutually disjoint")]
    InvalidSelection,

    /// The sampled subgraph cannot support a resampled study.
    #[error("sampled subgraph too small to resample (need at least n_sources + 2 vertices)")]
    SampledGraphTooSmall,

    /// The resampling fixed-point search ran out of iterations. The best
    /// iterate seen so far is attached for diagnostics.
    #[error(
        "resampling search did not converge within {max_iterations} iterations \
         (bracket [{bracket_low}, {bracket_high}])"
    )]
    NonConvergence {
        max_iterations: usize,
        bracket_low: usize,
        bracket_high: usize,
        best: Box<ResamplingReport>,
    },

    /// Experiment configuration failed validation; the message names the field.
    #[error("config error: {0}")]
    Config(String),

    /// The study was built without `keep_paths`, so traces cannot be listed.
    #[error("study was built without path retention; rerun with keep_paths")]
    PathsNotRetained,
}
