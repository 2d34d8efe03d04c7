//! Simulation and estimation toolkit for inferring the size of a network
//! that is only observed through merged traceroute-like probes.
//!
//! The pipeline has three stages, mirrored by the module layout:
//!
//! 1. [`graph`] builds or loads an undirected, connected ground-truth graph
//!    (Erdős–Rényi, preferential attachment, or an edge-list file).
//! 2. [`routing`] fixes one shortest-path tree per monitor (route choices are
//!    made once, with random tie-breaking) and merges monitor→target paths
//!    into a sampled subgraph together with per-vertex coverage bookkeeping.
//! 3. [`estimators`] turns a sampled study into estimates of the true vertex
//!    count: the observed count itself, a leave-one-target-out correction,
//!    its closed-form approximation, and a resampling fixed-point search.
//!
//! [`centrality`] provides the betweenness identity that motivates the whole
//! exercise (average betweenness determines the vertex count exactly when the
//! full graph is known), and [`harness`] drives repeated-trial experiment
//! sweeps with deterministic seeding and CSV output.
//!
//! Every random decision in the crate flows from explicit `u64` seeds through
//! counter-derived per-component streams, so equal inputs reproduce results
//! bit for bit, including under the parallel execution paths.

#![forbid(unsafe_code)]

pub mod centrality;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod routing;
pub mod seed;

pub use error::{Error, Result};
pub use graph::{Graph, GraphSpec};
pub use routing::{RouteTable, StudyOptions, TraceStudy};
