//! Spanning trees: construction strategies, tree paths, LCA, per-edge
//! stretch, cycle resistances and the sampling distribution over off-tree
//! edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// How to pick the spanning tree.
#[derive(Debug, Clone)]
pub enum TreeStrategy {
    /// Randomized ball-growing heuristic with radius doubling and random
    /// shifts. No formal stretch guarantee; correctness of the solvers needs
    /// only a valid spanning tree, stretch affects speed.
    LowStretch,
    /// Minimum total resistance tree (Kruskal, ties by edge id).
    MinResistance,
    /// Caller-provided tree edge ids, validated.
    Given(Vec<usize>),
}

/// Rooted spanning tree with the tree/off-tree edge partition and the data
/// needed for O(log n) tree-path queries. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<u32>,
    /// Parent edge id per vertex; the root maps to u32::MAX.
    parent_edge: Vec<u32>,
    /// +1 if the graph edge is oriented parent -> child (away from the
    /// root), -1 otherwise.
    parent_edge_sign: Vec<i8>,
    depth: Vec<u32>,
    /// Sum of resistances along the root path.
    depth_resistance: Vec<f64>,
    /// Vertices in BFS order from the root.
    order: Vec<u32>,
    off_tree: Vec<u32>,
    tree_edge: Vec<bool>,
    /// Binary-lifting ancestor table, lift[k][v] = 2^k-th ancestor.
    lift: Vec<Vec<u32>>,
}

/// Per-tree stretch statistics and the cycle-sampling distribution.
#[derive(Debug, Clone)]
pub struct StretchSummary {
    /// Off-tree edge ids, aligned with the per-edge vectors below.
    pub off_tree: Vec<u32>,
    /// st_e = (tree-path resistance) / r_e per off-tree edge.
    pub stretch: Vec<f64>,
    /// R_e = r_e * (1 + st_e) per off-tree edge.
    pub cycle_resistance: Vec<f64>,
    /// st(T): total stretch over all edges; tree edges contribute 1 each.
    pub total_stretch: f64,
    /// tau(T) = sum R_e / r_e over off-tree edges.
    pub tau: f64,
    /// p_e = R_e / (r_e * tau); empty when there are no off-tree edges.
    pub probabilities: Vec<f64>,
}

struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        let mut c = x;
        while c != r {
            let next = self.parent[c] as usize;
            self.parent[c] = r as u32;
            c = next;
        }
        r
    }

    /// Unions two sets keeping the smaller id as the representative.
    /// Returns false if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo as u32;
        true
    }
}

/// Builds a spanning tree rooted at vertex 0.
pub fn build_tree(g: &WeightedGraph, strategy: TreeStrategy, seed: u64) -> Result<SpanningTree> {
    build_tree_rooted(g, strategy, seed, 0)
}

/// Builds a spanning tree rooted at the given vertex.
pub fn build_tree_rooted(
    g: &WeightedGraph,
    strategy: TreeStrategy,
    seed: u64,
    root: usize,
) -> Result<SpanningTree> {
    let n = g.vertex_count();
    if root >= n {
        return Err(Error::VertexOutOfRange { vertex: root, n });
    }
    if !g.is_connected() {
        return Err(Error::GraphDisconnected);
    }
    let tree_ids = match strategy {
        TreeStrategy::Given(ids) => validate_tree_edges(g, &ids)?,
        TreeStrategy::MinResistance => kruskal_edges(g),
        TreeStrategy::LowStretch => ball_growing_edges(g, seed),
    };
    Ok(SpanningTree::from_edge_ids(g, &tree_ids, root))
}

fn validate_tree_edges(g: &WeightedGraph, ids: &[usize]) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    if ids.len() != n.saturating_sub(1) {
        return Err(Error::InvalidTreeEdges {
            reason: format!("expected {} edges, got {}", n.saturating_sub(1), ids.len()),
        });
    }
    let mut dsu = Dsu::new(n);
    for &id in ids {
        if id >= g.edge_count() {
            return Err(Error::InvalidTreeEdges { reason: format!("edge id {id} out of range") });
        }
        let e = g.edge(id);
        if !dsu.union(e.tail as usize, e.head as usize) {
            return Err(Error::InvalidTreeEdges {
                reason: format!("edge id {id} closes a cycle"),
            });
        }
    }
    Ok(ids.to_vec())
}

fn kruskal_edges(g: &WeightedGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut ids: Vec<usize> = (0..g.edge_count()).collect();
    ids.sort_by(|&a, &b| {
        g.edge(a)
            .resistance
            .total_cmp(&g.edge(b).resistance)
            .then(a.cmp(&b))
    });
    let mut dsu = Dsu::new(n);
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for id in ids {
        let e = g.edge(id);
        if dsu.union(e.tail as usize, e.head as usize) {
            out.push(id);
            if out.len() == n - 1 {
                break;
            }
        }
    }
    out
}

/// Randomized ball growing: repeatedly partition the contracted cluster
/// graph into resistance-radius balls grown from randomly ordered centers,
/// merging a shortest-path tree inside each ball. The radius doubles per
/// round with a random shift; ties in the ball Dijkstra break toward the
/// lowest cluster id.
fn ball_growing_edges(g: &WeightedGraph, seed: u64) -> Vec<usize> {
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dsu = Dsu::new(n);
    let mut tree_edges: Vec<usize> = Vec::with_capacity(n.saturating_sub(1));
    if n <= 1 {
        return tree_edges;
    }

    let min_r = g
        .edges()
        .iter()
        .map(|e| e.resistance)
        .fold(f64::INFINITY, f64::min);
    let mut base_radius = min_r;

    while tree_edges.len() + 1 < n {
        let radius = base_radius * (1.0 + rng.random::<f64>());
        base_radius *= 2.0;

        // Contract merged components: cluster ids indexed by DSU roots.
        let mut cluster_of = vec![u32::MAX; n];
        let mut clusters: Vec<u32> = Vec::new();
        for v in 0..n {
            let r = dsu.find(v);
            if cluster_of[r] == u32::MAX {
                cluster_of[r] = clusters.len() as u32;
                clusters.push(r as u32);
            }
        }
        let k = clusters.len();

        // Keep the lightest inter-cluster edge per cluster pair.
        let mut best: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
        for id in 0..m {
            let e = g.edge(id);
            let ca = cluster_of[dsu.find(e.tail as usize)];
            let cb = cluster_of[dsu.find(e.head as usize)];
            if ca == cb {
                continue;
            }
            let key = (ca.min(cb), ca.max(cb));
            match best.entry(key) {
                std::collections::hash_map::Entry::Occupied(mut o) => {
                    if e.resistance < g.edge(*o.get()).resistance {
                        o.insert(id);
                    }
                }
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(id);
                }
            }
        }
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); k];
        for (&(ca, cb), &id) in &best {
            adj[ca as usize].push((cb, id as u32));
            adj[cb as usize].push((ca, id as u32));
        }

        // Random center order.
        let mut centers: Vec<u32> = (0..k as u32).collect();
        for i in (1..k).rev() {
            let j = rng.random_range(0..=i);
            centers.swap(i, j);
        }

        let mut assigned = vec![false; k];
        let mut dist = vec![f64::INFINITY; k];
        let mut heap: std::collections::BinaryHeap<BallEntry> = std::collections::BinaryHeap::new();
        for &c in &centers {
            if assigned[c as usize] {
                continue;
            }
            heap.clear();
            dist[c as usize] = 0.0;
            heap.push(BallEntry { dist: 0.0, cluster: c, via: u32::MAX });
            while let Some(BallEntry { dist: d, cluster: u, via }) = heap.pop() {
                let ui = u as usize;
                if assigned[ui] {
                    continue;
                }
                assigned[ui] = true;
                if via != u32::MAX {
                    let e = g.edge(via as usize);
                    if dsu.union(e.tail as usize, e.head as usize) {
                        tree_edges.push(via as usize);
                    }
                }
                for &(v, eid) in &adj[ui] {
                    let vi = v as usize;
                    if assigned[vi] {
                        continue;
                    }
                    let nd = d + g.edge(eid as usize).resistance;
                    if nd <= radius && nd < dist[vi] {
                        dist[vi] = nd;
                        heap.push(BallEntry { dist: nd, cluster: v, via: eid });
                    }
                }
            }
        }
        // Reset dist stamps for the next round (only touched entries matter,
        // but k shrinks every effective round; a plain refill is fine).
    }
    tree_edges
}

/// Heap entry ordered by smallest distance, then lowest cluster id.
#[derive(PartialEq)]
struct BallEntry {
    dist: f64,
    cluster: u32,
    via: u32,
}

impl Eq for BallEntry {}

impl Ord for BallEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.cluster.cmp(&self.cluster))
    }
}

impl PartialOrd for BallEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl SpanningTree {
    fn from_edge_ids(g: &WeightedGraph, tree_ids: &[usize], root: usize) -> SpanningTree {
        let n = g.vertex_count();
        let mut tree_edge = vec![false; g.edge_count()];
        for &id in tree_ids {
            tree_edge[id] = true;
        }

        let mut parent = vec![u32::MAX; n];
        let mut parent_edge = vec![u32::MAX; n];
        let mut parent_edge_sign = vec![0i8; n];
        let mut depth = vec![0u32; n];
        let mut depth_resistance = vec![0.0; n];
        let mut order = Vec::with_capacity(n);

        let mut queue = std::collections::VecDeque::new();
        parent[root] = root as u32;
        queue.push_back(root as u32);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(u, eid) in g.neighbors(v as usize) {
                if !tree_edge[eid as usize] || parent[u as usize] != u32::MAX {
                    continue;
                }
                let e = g.edge(eid as usize);
                parent[u as usize] = v;
                parent_edge[u as usize] = eid;
                parent_edge_sign[u as usize] = if e.tail == v { 1 } else { -1 };
                depth[u as usize] = depth[v as usize] + 1;
                depth_resistance[u as usize] = depth_resistance[v as usize] + e.resistance;
                queue.push_back(u);
            }
        }
        debug_assert_eq!(order.len(), n, "tree must span the graph");

        let off_tree: Vec<u32> = (0..g.edge_count() as u32)
            .filter(|&id| !tree_edge[id as usize])
            .collect();

        // Binary lifting table.
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        let levels = (usize::BITS - (max_depth as usize).leading_zeros()).max(1) as usize;
        let mut lift = Vec::with_capacity(levels);
        lift.push(parent.clone());
        for k in 1..levels {
            let prev = &lift[k - 1];
            let next: Vec<u32> = (0..n).map(|v| prev[prev[v] as usize]).collect();
            lift.push(next);
        }

        SpanningTree {
            root,
            parent,
            parent_edge,
            parent_edge_sign,
            depth,
            depth_resistance,
            order,
            off_tree,
            tree_edge,
            lift,
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v] as usize
    }

    /// Parent edge id and its sign relative to the graph orientation
    /// (+1 when the edge points away from the root); None at the root.
    pub fn parent_edge(&self, v: usize) -> Option<(usize, i8)> {
        if v == self.root {
            None
        } else {
            Some((self.parent_edge[v] as usize, self.parent_edge_sign[v]))
        }
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    pub fn depth_resistance(&self, v: usize) -> f64 {
        self.depth_resistance[v]
    }

    /// Vertices in BFS order from the root.
    pub fn bfs_order(&self) -> &[u32] {
        &self.order
    }

    pub fn off_tree_edges(&self) -> &[u32] {
        &self.off_tree
    }

    pub fn is_tree_edge(&self, eid: usize) -> bool {
        self.tree_edge[eid]
    }

    /// Lowest common ancestor with respect to the root.
    pub fn lca(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a] - self.depth[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.lift[k][a] as usize;
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return a;
        }
        for k in (0..self.lift.len()).rev() {
            if self.lift[k][a] != self.lift[k][b] {
                a = self.lift[k][a] as usize;
                b = self.lift[k][b] as usize;
            }
        }
        self.parent[a] as usize
    }

    /// Resistance of the unique tree path between `a` and `b`.
    pub fn path_resistance(&self, a: usize, b: usize) -> f64 {
        let l = self.lca(a, b);
        self.depth_resistance[a] + self.depth_resistance[b] - 2.0 * self.depth_resistance[l]
    }

    /// Signed edge sequence of the walk `a -> b`: `(edge id, +1)` when the
    /// edge is traversed along its graph orientation, `(edge id, -1)`
    /// against. Empty when `a == b`.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<(usize, i8)> {
        let l = self.lca(a, b);
        let mut up = Vec::new();
        let mut v = a;
        while v != l {
            // Walking child -> parent runs against the away-from-root sign.
            up.push((self.parent_edge[v] as usize, -self.parent_edge_sign[v]));
            v = self.parent[v] as usize;
        }
        let mut down = Vec::new();
        let mut v = b;
        while v != l {
            down.push((self.parent_edge[v] as usize, self.parent_edge_sign[v]));
            v = self.parent[v] as usize;
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// Dense tree-cycle circulation for an off-tree edge `(a, b)`: one unit
    /// on the edge itself plus the tree path `b -> a`.
    pub fn cycle_vector(&self, g: &WeightedGraph, eid: usize) -> Vec<f64> {
        assert!(!self.tree_edge[eid], "cycle_vector expects an off-tree edge");
        let e = g.edge(eid);
        let mut c = vec![0.0; g.edge_count()];
        c[eid] = 1.0;
        for (id, sign) in self.tree_path(e.head as usize, e.tail as usize) {
            c[id] += sign as f64;
        }
        c
    }

    /// Diagnostic text form: one line per vertex, `parent edge_sign`.
    pub fn exchange_format(&self) -> String {
        let mut out = String::new();
        for v in 0..self.vertex_count() {
            out.push_str(&format!("{} {}\n", self.parent[v], self.parent_edge_sign[v]));
        }
        out
    }
}

/// Computes per-edge stretch, cycle resistances, `tau` and the sampling
/// probabilities for the given tree.
pub fn compute_stretch(g: &WeightedGraph, tree: &SpanningTree) -> StretchSummary {
    let n = g.vertex_count();
    let m = g.edge_count();
    let off_tree = tree.off_tree_edges().to_vec();
    let mut stretch = Vec::with_capacity(off_tree.len());
    let mut cycle_resistance = Vec::with_capacity(off_tree.len());
    let mut tau = 0.0;
    let mut off_stretch_sum = 0.0;
    for &eid in &off_tree {
        let e = g.edge(eid as usize);
        let path_r = tree.path_resistance(e.tail as usize, e.head as usize);
        let st = path_r / e.resistance;
        let r_cycle = e.resistance + path_r;
        stretch.push(st);
        cycle_resistance.push(r_cycle);
        tau += r_cycle / e.resistance;
        off_stretch_sum += st;
    }
    let total_stretch = off_stretch_sum + (n.saturating_sub(1)) as f64;
    let probabilities: Vec<f64> = if off_tree.is_empty() {
        Vec::new()
    } else {
        cycle_resistance
            .iter()
            .zip(&off_tree)
            .map(|(&r_cycle, &eid)| r_cycle / (g.edge(eid as usize).resistance * tau))
            .collect()
    };
    debug_assert!(m >= n.saturating_sub(1));
    StretchSummary { off_tree, stretch, cycle_resistance, total_stretch, tau, probabilities }
}
