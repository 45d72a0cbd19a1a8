//! Separator-decomposition path-sum structure.
//!
//! Supports, over a rooted spanning tree with root `s`:
//!
//! - `update(a, alpha)`: add `alpha` to the flow of every edge on the tree
//!   path from `s` to `a`, oriented away from the root;
//! - `query(a)`: return the tree-induced voltage
//!   `v(a) = sum_{e in P(a,s)} f(e) r_e` (so `v(s) = 0` and pushing positive
//!   flow away from the root makes voltages negative).
//!
//! Both run in O(log n): the tree is recursively split at a vertex separator
//! whose removal leaves subtrees of at most `n/2 + 1` vertices, and each
//! recursion node maintains just two scalars, the total potential drop
//! `d_drop` on its root-to-separator path and the amount of flow `d_ext`
//! pushed through that whole path by updates beyond the separator. The
//! per-vertex recursion walk is precomputed at init, so queries and updates
//! are short loops over a trace array.
//!
//! `flatten` exports the equivalent sparse query/update vectors: `query(a)`
//! becomes one sparse dot product against a state vector of all
//! `(d_ext, d_drop)` pairs and `update(a, alpha)` one sparse axpy.

use crate::error::{Error, Result};
use crate::graph::{FlowVector, WeightedGraph};
use crate::tree::SpanningTree;

const IN_T0: u8 = 1;
const IS_SEP: u8 = 2;
const IS_BASE: u8 = 4;

#[derive(Debug, Clone, Copy)]
struct TraceEntry {
    node: u32,
    flags: u8,
    height: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct NodeState {
    d_ext: f64,
    d_drop: f64,
}

/// One step of the separator recursion, exposed for inspection and tests.
#[derive(Debug)]
pub struct Decomposition {
    pub separator: usize,
    /// `(subtree root, subtree vertices)`; empty for the 2-vertex base case.
    pub subtrees: Vec<(usize, Vec<u32>)>,
}

/// The initialized structure. Single-owner mutable state: queries are safe
/// only without concurrent updates.
#[derive(Debug, Clone)]
pub struct PathSumTree {
    root: usize,
    n: usize,
    nodes: Vec<NodeState>,
    trace_offsets: Vec<u32>,
    entries: Vec<TraceEntry>,
}

/// Flattened form: the entire state is one vector, queries are sparse dot
/// products and updates sparse additions. Mirrors a freshly initialized
/// structure (zero state).
#[derive(Debug, Clone)]
pub struct FlatPathSum {
    state: Vec<f64>,
    query_vectors: Vec<Vec<(u32, f64)>>,
    update_vectors: Vec<Vec<(u32, f64)>>,
}

/// Scratch for the recursive init; arrays are stamped rather than cleared.
struct Builder {
    tadj_offsets: Vec<u32>,
    tadj: Vec<(u32, f64)>,
    stamp: Vec<u32>,
    cur: u32,
    visited: Vec<u32>,
    local_parent: Vec<u32>,
    local_parent_r: Vec<f64>,
    local_size: Vec<u32>,
    on_path: Vec<u32>,
    path_res: Vec<f64>,
    height: Vec<f64>,
    in_sep_subtree: Vec<u32>,
    order: Vec<u32>,
}

impl Builder {
    fn new(g: &WeightedGraph, tree: &SpanningTree) -> Builder {
        let n = g.vertex_count();
        let mut degree = vec![0u32; n];
        for v in 0..n {
            if tree.parent_edge(v).is_some() {
                degree[v] += 1;
                degree[tree.parent(v)] += 1;
            }
        }
        let mut tadj_offsets = vec![0u32; n + 1];
        for v in 0..n {
            tadj_offsets[v + 1] = tadj_offsets[v] + degree[v];
        }
        let mut cursor: Vec<u32> = tadj_offsets[..n].to_vec();
        let mut tadj = vec![(0u32, 0.0); tadj_offsets[n] as usize];
        for v in 0..n {
            if let Some((eid, _)) = tree.parent_edge(v) {
                let p = tree.parent(v);
                let r = g.edge(eid).resistance;
                tadj[cursor[v] as usize] = (p as u32, r);
                cursor[v] += 1;
                tadj[cursor[p] as usize] = (v as u32, r);
                cursor[p] += 1;
            }
        }
        Builder {
            tadj_offsets,
            tadj,
            stamp: vec![0; n],
            cur: 0,
            visited: vec![0; n],
            local_parent: vec![0; n],
            local_parent_r: vec![0.0; n],
            local_size: vec![0; n],
            on_path: vec![0; n],
            path_res: vec![0.0; n],
            height: vec![0.0; n],
            in_sep_subtree: vec![0; n],
            order: Vec::new(),
        }
    }

    fn neighbors(&self, v: usize) -> &[(u32, f64)] {
        &self.tadj[self.tadj_offsets[v] as usize..self.tadj_offsets[v + 1] as usize]
    }

    /// BFS over the stamped vertex set, filling local parents, sizes and the
    /// traversal order.
    fn traverse(&mut self, verts: &[u32], root: u32) {
        self.cur += 1;
        let st = self.cur;
        for &v in verts {
            self.stamp[v as usize] = st;
        }
        self.order.clear();
        self.order.push(root);
        self.visited[root as usize] = st;
        self.local_parent[root as usize] = root;
        self.local_parent_r[root as usize] = 0.0;
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            let (start, end) = (
                self.tadj_offsets[v as usize] as usize,
                self.tadj_offsets[v as usize + 1] as usize,
            );
            for i in start..end {
                let (u, r) = self.tadj[i];
                if self.stamp[u as usize] == st && self.visited[u as usize] != st {
                    self.visited[u as usize] = st;
                    self.local_parent[u as usize] = v;
                    self.local_parent_r[u as usize] = r;
                    self.order.push(u);
                }
            }
        }
        debug_assert_eq!(self.order.len(), verts.len(), "subtree must be connected");
        for &v in &self.order {
            self.local_size[v as usize] = 1;
        }
        for i in (1..self.order.len()).rev() {
            let v = self.order[i] as usize;
            self.local_size[self.local_parent[v] as usize] += self.local_size[v];
        }
    }

    /// Descends from the root into the largest child subtree until every
    /// child has at most half the vertices. Ties break to the lowest id.
    fn find_separator(&self, root: u32, total: usize) -> u32 {
        let st = self.cur;
        let mut v = root;
        loop {
            let mut best: Option<(u32, u32)> = None;
            for &(u, _) in self.neighbors(v as usize) {
                if self.visited[u as usize] == st && self.local_parent[u as usize] == v {
                    let size = self.local_size[u as usize];
                    let better = match best {
                        None => true,
                        Some((bs, bu)) => size > bs || (size == bs && u < bu),
                    };
                    if better {
                        best = Some((size, u));
                    }
                }
            }
            match best {
                Some((size, u)) if 2 * size as usize > total => v = u,
                _ => return v,
            }
        }
    }

    /// Heights: resistance of `P(root,a) intersect P(root,sep)` for every
    /// vertex in the current order.
    fn fill_heights(&mut self, root: u32, sep: u32) {
        let st = self.cur;
        // Prefix resistances along the root -> sep path.
        let mut path = Vec::new();
        let mut v = sep;
        while v != root {
            path.push(v);
            v = self.local_parent[v as usize];
        }
        path.push(root);
        path.reverse();
        let mut acc = 0.0;
        for &v in &path {
            acc += self.local_parent_r[v as usize];
            self.on_path[v as usize] = st;
            self.path_res[v as usize] = if v == root { 0.0 } else { acc };
        }
        self.path_res[root as usize] = 0.0;
        for i in 0..self.order.len() {
            let v = self.order[i] as usize;
            self.height[v] = if self.on_path[v] == st {
                self.path_res[v]
            } else {
                self.height[self.local_parent[v] as usize]
            };
        }
    }

    /// Splits the current subproblem at `sep`, returning the child
    /// subproblems. Marks `in_sep_subtree` as a side effect.
    fn split(&mut self, verts: &[u32], root: u32, sep: u32) -> Vec<(usize, Vec<u32>)> {
        let st = self.cur;
        let mut children: Vec<(usize, Vec<u32>)> = Vec::new();
        // Each local child of sep spawns a subtree rooted at sep.
        for i in self.tadj_offsets[sep as usize]..self.tadj_offsets[sep as usize + 1] {
            let (c, _) = self.tadj[i as usize];
            if self.visited[c as usize] != st || self.local_parent[c as usize] != sep {
                continue;
            }
            let mut list = vec![sep, c];
            self.in_sep_subtree[c as usize] = st;
            let mut head = 1;
            while head < list.len() {
                let v = list[head];
                head += 1;
                for j in self.tadj_offsets[v as usize]..self.tadj_offsets[v as usize + 1] {
                    let (u, _) = self.tadj[j as usize];
                    if self.visited[u as usize] == st && self.local_parent[u as usize] == v {
                        self.in_sep_subtree[u as usize] = st;
                        list.push(u);
                    }
                }
            }
            children.push((sep as usize, list));
        }
        self.in_sep_subtree[sep as usize] = st;
        if sep != root {
            // T0: everything outside sep's subtree, with sep attached as a leaf.
            let mut t0: Vec<u32> = verts
                .iter()
                .copied()
                .filter(|&v| self.in_sep_subtree[v as usize] != st)
                .collect();
            t0.push(sep);
            children.insert(0, (root as usize, t0));
        }
        children
    }
}

/// One application of the separator step to an explicit vertex set; used by
/// the structure's init and directly testable.
pub fn tree_decompose(
    g: &WeightedGraph,
    tree: &SpanningTree,
    verts: &[u32],
    root: usize,
) -> Result<Decomposition> {
    if verts.len() < 2 {
        return Err(Error::TooSmall { n: verts.len() });
    }
    let mut b = Builder::new(g, tree);
    b.traverse(verts, root as u32);
    if verts.len() == 2 {
        // 2-vertex base case: the separator is the non-root vertex and no
        // subtrees are produced.
        let sep = verts.iter().copied().find(|&v| v as usize != root).unwrap();
        return Ok(Decomposition { separator: sep as usize, subtrees: Vec::new() });
    }
    let sep = b.find_separator(root as u32, verts.len());
    let subtrees = b.split(verts, root as u32, sep);
    for (_, list) in &subtrees {
        debug_assert!(list.len() <= verts.len() / 2 + 1, "separator balance violated");
    }
    Ok(Decomposition { separator: sep as usize, subtrees })
}

impl PathSumTree {
    /// Builds the decomposition for the whole tree. O(n log n).
    pub fn init(g: &WeightedGraph, tree: &SpanningTree) -> PathSumTree {
        let n = g.vertex_count();
        let root = tree.root();
        let mut nodes: Vec<NodeState> = Vec::new();
        let mut per_vertex: Vec<Vec<TraceEntry>> = vec![Vec::new(); n];

        if n >= 2 {
            let mut b = Builder::new(g, tree);
            let all: Vec<u32> = (0..n as u32).collect();
            // Breadth-first over the decomposition keeps the frequently
            // shared upper-level node states adjacent in memory.
            let mut work: std::collections::VecDeque<(Vec<u32>, u32)> = std::collections::VecDeque::new();
            work.push_back((all, root as u32));
            while let Some((verts, sub_root)) = work.pop_front() {
                let node_id = nodes.len() as u32;
                nodes.push(NodeState::default());
                b.traverse(&verts, sub_root);

                if verts.len() == 2 {
                    let other = verts.iter().copied().find(|&v| v != sub_root).unwrap();
                    per_vertex[other as usize].push(TraceEntry {
                        node: node_id,
                        flags: IS_SEP | IS_BASE,
                        height: b.local_parent_r[other as usize],
                    });
                    continue;
                }

                let sep = b.find_separator(sub_root, verts.len());
                b.fill_heights(sub_root, sep);
                let children = b.split(&verts, sub_root, sep);
                let st = b.cur;
                for &v in &verts {
                    if v == sub_root {
                        continue;
                    }
                    let flags = if v == sep {
                        // The separator is a leaf of T0; updates at it do not
                        // propagate flow beyond the separator path.
                        IS_SEP | IN_T0
                    } else if sep != sub_root && b.in_sep_subtree[v as usize] != st {
                        IN_T0
                    } else {
                        0
                    };
                    per_vertex[v as usize].push(TraceEntry {
                        node: node_id,
                        flags,
                        height: b.height[v as usize],
                    });
                }
                for (child_root, list) in children {
                    debug_assert!(list.len() <= verts.len() / 2 + 1, "separator balance violated");
                    work.push_back((list, child_root as u32));
                }
            }
        }

        let mut trace_offsets = vec![0u32; n + 1];
        for v in 0..n {
            trace_offsets[v + 1] = trace_offsets[v] + per_vertex[v].len() as u32;
        }
        let mut entries = Vec::with_capacity(trace_offsets[n] as usize);
        for list in per_vertex {
            entries.extend(list);
        }
        PathSumTree { root, n, nodes, trace_offsets, entries }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn trace(&self, a: usize) -> &[TraceEntry] {
        &self.entries[self.trace_offsets[a] as usize..self.trace_offsets[a + 1] as usize]
    }

    /// Tree-induced voltage `v(a) = sum_{e in P(a,s)} f(e) r_e`; 0 at the root.
    pub fn query(&self, a: usize) -> f64 {
        let mut acc = 0.0;
        for t in self.trace(a) {
            let node = &self.nodes[t.node as usize];
            if t.flags & (IS_SEP | IS_BASE) != 0 {
                acc += node.d_drop;
                break;
            }
            if t.flags & IN_T0 != 0 {
                acc += node.d_ext * t.height;
            } else {
                acc += node.d_drop;
            }
        }
        // The recursion accumulates the root-to-a oriented drop; the public
        // convention orients the path a -> root.
        -acc
    }

    /// Adds `alpha` to `f(e)` for every edge on `P(s,a)`, oriented away from
    /// the root. A no-op at the root.
    ///
    /// The walk does not stop where `a` is the separator: `a` is then a leaf
    /// of that node's T0 child, and the drop it induces on the shorter
    /// separator paths inside T0 must be recorded there for queries at
    /// vertices strictly inside the path.
    pub fn update(&mut self, a: usize, alpha: f64) {
        let (start, end) = (self.trace_offsets[a] as usize, self.trace_offsets[a + 1] as usize);
        for i in start..end {
            let t = self.entries[i];
            let node = &mut self.nodes[t.node as usize];
            node.d_drop += alpha * t.height;
            if t.flags & (IN_T0 | IS_BASE) == 0 {
                node.d_ext += alpha;
            }
        }
    }

    /// Decomposition nodes touched by `update(a, _)`; `query(a)` touches at
    /// most this many.
    pub fn nodes_touched(&self, a: usize) -> usize {
        self.trace(a).len()
    }

    /// Number of decomposition nodes containing `a` as a non-root member.
    pub fn membership_count(&self, a: usize) -> usize {
        self.trace(a).len()
    }

    /// Resets all node state to zero.
    pub fn clear(&mut self) {
        for node in &mut self.nodes {
            *node = NodeState::default();
        }
    }

    /// Exports the sparse query/update vectors of the flattened form. The
    /// returned state corresponds to a freshly initialized structure.
    pub fn flatten(&self) -> FlatPathSum {
        let dim = 2 * self.nodes.len();
        let mut query_vectors = Vec::with_capacity(self.n);
        let mut update_vectors = Vec::with_capacity(self.n);
        for a in 0..self.n {
            let mut q: Vec<(u32, f64)> = Vec::new();
            let mut u: Vec<(u32, f64)> = Vec::new();
            for t in self.trace(a) {
                let ext_idx = 2 * t.node;
                let drop_idx = 2 * t.node + 1;
                let in_t0 = t.flags & IS_BASE == 0 && t.flags & IN_T0 != 0;
                // Query reads d_ext * height over T0 memberships and d_drop
                // elsewhere, negated to match the public orientation.
                if in_t0 {
                    if t.height != 0.0 {
                        q.push((ext_idx, -t.height));
                    }
                } else {
                    q.push((drop_idx, -1.0));
                }
                // Updates add alpha*height to every d_drop on the walk and
                // alpha to d_ext outside T0.
                if t.height != 0.0 {
                    u.push((drop_idx, t.height));
                }
                if !in_t0 {
                    u.push((ext_idx, 1.0));
                }
            }
            query_vectors.push(q);
            update_vectors.push(u);
        }
        FlatPathSum { state: vec![0.0; dim], query_vectors, update_vectors }
    }
}

impl FlatPathSum {
    pub fn dimension(&self) -> usize {
        self.state.len()
    }

    pub fn query(&self, a: usize) -> f64 {
        self.query_vectors[a]
            .iter()
            .map(|&(i, w)| w * self.state[i as usize])
            .sum()
    }

    pub fn update(&mut self, a: usize, alpha: f64) {
        for &(i, w) in &self.update_vectors[a] {
            self.state[i as usize] += alpha * w;
        }
    }

    pub fn query_support(&self, a: usize) -> usize {
        self.query_vectors[a].len()
    }

    pub fn update_support(&self, a: usize) -> usize {
        self.update_vectors[a].len()
    }
}

/// Cycle resistances `R_e` for every off-tree edge via a dedicated
/// structure instance whose "flows" encode resistances: pushing one unit
/// along `P(s,b)` and minus one along `P(s,a)` makes the voltage difference
/// across `(a, b)` equal to the tree-path resistance. O(m log n) total.
pub fn compute_all_cycle_resistances(
    g: &WeightedGraph,
    tree: &SpanningTree,
) -> Vec<f64> {
    let mut ds = PathSumTree::init(g, tree);
    let mut out = Vec::with_capacity(tree.off_tree_edges().len());
    for &eid in tree.off_tree_edges() {
        let e = g.edge(eid as usize);
        let (a, b) = (e.tail as usize, e.head as usize);
        ds.update(b, 1.0);
        ds.update(a, -1.0);
        out.push(ds.query(a) - ds.query(b) + e.resistance);
        ds.update(b, -1.0);
        ds.update(a, 1.0);
    }
    out
}

/// Reads the tree-edge flows back out of the structure: across a tree edge
/// the voltage drop is exactly `f(e) r_e`. Off-tree entries are zero.
pub fn materialize_tree_flows(
    ds: &PathSumTree,
    g: &WeightedGraph,
    tree: &SpanningTree,
) -> FlowVector {
    let mut f = FlowVector::zeros(g.edge_count());
    for v in 0..g.vertex_count() {
        if let Some((eid, _)) = tree.parent_edge(v) {
            let e = g.edge(eid);
            f[eid] = (ds.query(e.tail as usize) - ds.query(e.head as usize)) / e.resistance;
        }
    }
    f
}
