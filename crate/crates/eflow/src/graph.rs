//! Weighted graph representation and the basic electrical quantities.
//!
//! A [`WeightedGraph`] is an oriented edge list with positive resistances.
//! Orientation is fixed at construction (tail < head), self-loops are
//! rejected and parallel edges are merged by adding conductances, so the
//! Laplacian of the input is preserved exactly while every unordered vertex
//! pair carries at most one edge.
//!
//! Flows are signed with respect to the fixed orientation: a negative value
//! on edge `(a, b)` means current runs from `b` to `a`. The incidence action
//! `B^T f` follows the matrix convention `[B^T f]_a = outflow(a) - inflow(a)`,
//! so a feasible flow satisfies `B^T f = chi` with `chi` the net current
//! injected per vertex.

use crate::error::{Error, Result};

/// One resistor: oriented from `tail` to `head` with `tail < head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: u32,
    pub head: u32,
    pub resistance: f64,
}

impl Edge {
    #[inline]
    pub fn conductance(&self) -> f64 {
        1.0 / self.resistance
    }

    /// Endpoint opposite to `v`.
    #[inline]
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail as usize {
            self.head as usize
        } else {
            self.tail as usize
        }
    }
}

/// Signed flow, one value per edge (units: current).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVector(pub Vec<f64>);

/// Net current injected per vertex; feasible solves require the entries to
/// sum to zero per connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandVector(pub Vec<f64>);

/// Vertex potentials, defined up to an additive constant per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageVector(pub Vec<f64>);

macro_rules! vector_impl {
    ($name:ident) => {
        impl $name {
            pub fn zeros(len: usize) -> Self {
                $name(vec![0.0; len])
            }
            pub fn len(&self) -> usize {
                self.0.len()
            }
            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }
        }
        impl std::ops::Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }
        impl std::ops::IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.0[i]
            }
        }
        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                $name(v)
            }
        }
    };
}

vector_impl!(FlowVector);
vector_impl!(DemandVector);
vector_impl!(VoltageVector);

/// Immutable weighted graph. Safe to share across threads; all operations
/// are pure functions of their inputs.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj_offsets: Vec<u32>,
    // (neighbor, edge id) pairs, grouped per vertex.
    adj: Vec<(u32, u32)>,
}

/// Builds a graph from raw `(a, b, resistance)` triples.
///
/// Self-loops are rejected, parallel edges are merged by conductance
/// addition (`w = sum 1/r_i`), and each edge is stored as `(min, max)` so
/// file round-trips are deterministic.
pub fn build_graph(n: usize, raw_edges: &[(usize, usize, f64)]) -> Result<WeightedGraph> {
    // Edge ids follow first occurrence in the input; duplicates only add
    // conductance.
    let mut index: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
    let mut conductance: Vec<f64> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for &(a, b, r) in raw_edges {
        if a >= n {
            return Err(Error::VertexOutOfRange { vertex: a, n });
        }
        if b >= n {
            return Err(Error::VertexOutOfRange { vertex: b, n });
        }
        if a == b {
            return Err(Error::SelfLoop { vertex: a });
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::NonpositiveResistance { a, b, resistance: r });
        }
        let key = (a.min(b) as u32, a.max(b) as u32);
        match index.entry(key) {
            std::collections::hash_map::Entry::Occupied(o) => conductance[*o.get()] += 1.0 / r,
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(pairs.len());
                pairs.push(key);
                conductance.push(1.0 / r);
            }
        }
    }
    let edges: Vec<Edge> = pairs
        .into_iter()
        .zip(conductance)
        .map(|((tail, head), w)| Edge { tail, head, resistance: 1.0 / w })
        .collect();
    Ok(WeightedGraph::from_normalized(n, edges))
}

impl WeightedGraph {
    /// Assembles the adjacency structure from already-normalized edges
    /// (tail < head, unique pairs, positive resistances).
    pub(crate) fn from_normalized(n: usize, edges: Vec<Edge>) -> Self {
        let mut degree = vec![0u32; n];
        for e in &edges {
            degree[e.tail as usize] += 1;
            degree[e.head as usize] += 1;
        }
        let mut adj_offsets = vec![0u32; n + 1];
        for v in 0..n {
            adj_offsets[v + 1] = adj_offsets[v] + degree[v];
        }
        let mut cursor: Vec<u32> = adj_offsets[..n].to_vec();
        let mut adj = vec![(0u32, 0u32); edges.len() * 2];
        for (id, e) in edges.iter().enumerate() {
            adj[cursor[e.tail as usize] as usize] = (e.head, id as u32);
            cursor[e.tail as usize] += 1;
            adj[cursor[e.head as usize] as usize] = (e.tail, id as u32);
            cursor[e.head as usize] += 1;
        }
        WeightedGraph { n, edges, adj_offsets, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// `(neighbor, edge id)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_offsets[v] as usize..self.adj_offsets[v + 1] as usize]
    }

    /// Returns the same edge set with resistances replaced. Edge ids are
    /// preserved, which the staged solvers rely on.
    pub(crate) fn with_resistances(&self, resistances: Vec<f64>) -> WeightedGraph {
        debug_assert_eq!(resistances.len(), self.edges.len());
        let edges = self
            .edges
            .iter()
            .zip(resistances)
            .map(|(e, r)| Edge { resistance: r, ..*e })
            .collect();
        WeightedGraph { n: self.n, edges, adj_offsets: self.adj_offsets.clone(), adj: self.adj.clone() }
    }

    /// `B^T f`: net flow out of each vertex. Entries sum to zero for any `f`
    /// because every edge appears once with each sign.
    pub fn divergence(&self, f: &FlowVector) -> Result<DemandVector> {
        if f.len() != self.edges.len() {
            return Err(Error::DimensionMismatch { expected: self.edges.len(), got: f.len() });
        }
        let mut out = vec![0.0; self.n];
        for (e, &fe) in self.edges.iter().zip(f.as_slice()) {
            out[e.tail as usize] += fe;
            out[e.head as usize] -= fe;
        }
        Ok(DemandVector(out))
    }

    /// `L x` computed as the divergence of the flow `R^{-1} B x`.
    pub fn apply_laplacian(&self, x: &VoltageVector) -> Result<DemandVector> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let induced: Vec<f64> = self
            .edges
            .iter()
            .map(|e| (x[e.tail as usize] - x[e.head as usize]) / e.resistance)
            .collect();
        self.divergence(&FlowVector(induced))
    }

    /// Energy `sum_e r_e f(e)^2 = ||f||_R^2`.
    pub fn energy(&self, f: &FlowVector) -> Result<f64> {
        if f.len() != self.edges.len() {
            return Err(Error::DimensionMismatch { expected: self.edges.len(), got: f.len() });
        }
        Ok(self
            .edges
            .iter()
            .zip(f.as_slice())
            .map(|(e, &fe)| e.resistance * fe * fe)
            .sum())
    }

    /// Dual energy `2 v^T chi - v^T L v`; never exceeds the optimal primal
    /// energy (weak duality).
    pub fn dual_energy(&self, v: &VoltageVector, chi: &DemandVector) -> Result<f64> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: v.len() });
        }
        if chi.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: chi.len() });
        }
        let lv = self.apply_laplacian(v)?;
        let mut acc = 0.0;
        for a in 0..self.n {
            acc += v[a] * (2.0 * chi[a] - lv[a]);
        }
        Ok(acc)
    }

    /// Duality gap `energy(f) - dual_energy(v, chi)`; nonnegative up to
    /// rounding whenever `f` is feasible for `chi`.
    pub fn duality_gap(
        &self,
        f: &FlowVector,
        v: &VoltageVector,
        chi: &DemandVector,
    ) -> Result<f64> {
        let tol = 1e-9 * (1.0 + max_abs(chi.as_slice()));
        let (feasible, residual) = self.check_feasible(f, chi, tol)?;
        if !feasible {
            return Err(Error::InfeasibleFlow { residual });
        }
        Ok(self.energy(f)? - self.dual_energy(v, chi)?)
    }

    /// Whether `||B^T f - chi||_inf <= tol`, along with the max residual.
    pub fn check_feasible(
        &self,
        f: &FlowVector,
        chi: &DemandVector,
        tol: f64,
    ) -> Result<(bool, f64)> {
        if chi.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: chi.len() });
        }
        let div = self.divergence(f)?;
        let mut residual: f64 = 0.0;
        for a in 0..self.n {
            residual = residual.max((div[a] - chi[a]).abs());
        }
        Ok((residual <= tol, residual))
    }

    /// Component label per vertex, labels numbered from 0 in order of first
    /// discovery.
    pub fn connected_components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(u, _) in self.neighbors(v) {
                    if label[u as usize] == usize::MAX {
                        label[u as usize] = next;
                        stack.push(u as usize);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.connected_components().iter().all(|&c| c == 0)
    }
}

pub(crate) fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, &x| m.max(x.abs()))
}
