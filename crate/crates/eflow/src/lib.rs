//! Electrical-flow solver for graph Laplacian and SDD linear systems.
//!
//! Solving `L v = chi` on a weighted graph is dual to finding the
//! electrical flow meeting the demands `chi`. This crate implements the
//! combinatorial approach: fix a spanning tree, start from the unique tree
//! flow meeting the demands, then repeatedly sample an off-tree edge
//! (proportionally to its cycle's stretch) and cancel the flow-induced
//! potential around its tree cycle. Each update runs in O(log n) through a
//! separator-decomposition path-sum structure, and the expected energy
//! contracts by `(1 - 1/tau)` per update, where `tau` is the tree condition
//! number.
//!
//! General symmetric diagonally dominant systems reduce to connected
//! Laplacian solves by a doubling construction ([`sdd`]). A dense
//! eigendecomposition oracle ([`oracle`]) provides desk-scale ground truth
//! for verification.
//!
//! Quick start:
//!
//! ```
//! use eflow::graph::{build_graph, DemandVector};
//! use eflow::solver::{solve, SolverOptions};
//!
//! let g = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
//! let chi = DemandVector(vec![1.0, 0.0, -1.0]);
//! let report = solve(&g, &chi, &SolverOptions::new(1e-6)).unwrap();
//! assert!((report.energy - 2.0 / 3.0).abs() < 1e-6);
//! ```

pub mod alias;
pub mod error;
pub mod gen;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod pathsum;
pub mod reference;
pub mod sdd;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{build_graph, DemandVector, FlowVector, VoltageVector, WeightedGraph};
pub use solver::{solve, SolveReport, SolverOptions, SolverVariant};
pub use tree::{build_tree, compute_stretch, SpanningTree, StretchSummary, TreeStrategy};
