//! Plain reference implementations used to verify the fast paths. These
//! walk tree paths edge by edge and exist only for cross-checking; they are
//! deliberately independent of the separator-decomposition code.

use crate::graph::{FlowVector, WeightedGraph};
use crate::tree::SpanningTree;

/// Naive path-walk counterpart to [`crate::pathsum::PathSumTree`]: stores
/// one flow value per tree edge (oriented away from the root) and walks
/// parent chains for every operation.
pub struct NaivePathSum<'a> {
    g: &'a WeightedGraph,
    tree: &'a SpanningTree,
    /// Flow on each vertex's parent edge, oriented root -> vertex.
    flow_away: Vec<f64>,
}

impl<'a> NaivePathSum<'a> {
    pub fn new(g: &'a WeightedGraph, tree: &'a SpanningTree) -> Self {
        NaivePathSum { g, tree, flow_away: vec![0.0; g.vertex_count()] }
    }

    pub fn update(&mut self, a: usize, alpha: f64) {
        let mut v = a;
        while v != self.tree.root() {
            self.flow_away[v] += alpha;
            v = self.tree.parent(v);
        }
    }

    /// `v(a) = sum_{e in P(a,s)} f(e) r_e`: walking toward the root runs
    /// against the away-from-root orientation.
    pub fn query(&self, a: usize) -> f64 {
        let mut acc = 0.0;
        let mut v = a;
        while v != self.tree.root() {
            let (eid, _) = self.tree.parent_edge(v).unwrap();
            acc -= self.flow_away[v] * self.g.edge(eid).resistance;
            v = self.tree.parent(v);
        }
        acc
    }

    /// Full flow vector over tree edges (graph orientation), zero off-tree.
    pub fn flows(&self) -> FlowVector {
        let mut f = FlowVector::zeros(self.g.edge_count());
        for v in 0..self.g.vertex_count() {
            if let Some((eid, sign)) = self.tree.parent_edge(v) {
                f[eid] = self.flow_away[v] * sign as f64;
            }
        }
        f
    }
}

/// Cycle potential computed directly from a full flow vector by walking the
/// tree cycle of the given off-tree edge.
pub fn cycle_potential_by_walk(
    g: &WeightedGraph,
    tree: &SpanningTree,
    f: &FlowVector,
    eid: usize,
) -> f64 {
    let e = g.edge(eid);
    let mut acc = f[eid] * e.resistance;
    for (id, sign) in tree.tree_path(e.head as usize, e.tail as usize) {
        acc += sign as f64 * f[id] * g.edge(id).resistance;
    }
    acc
}
