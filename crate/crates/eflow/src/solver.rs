//! The electrical-flow solvers: a feasible tree flow is repaired by
//! randomly sampled tree-cycle updates, each zeroing the flow-induced
//! potential around one off-tree edge's cycle. Expected energy contracts by
//! `(1 - 1/tau)` per update, so a fixed iteration budget yields an
//! eps-approximate flow and tree-induced voltages in expectation.
//!
//! Three variants share the update loop:
//!
//! - `simple`: one pass with `K = ceil(tau ln(st tau / eps))` updates;
//! - `example`: a warm start computed on a graph whose tree resistances are
//!   divided by `ln n`, then `K = ceil(tau ln(2 ln n / eps))` updates plus a
//!   uniformly random tail of at most `ceil(tau)` extra updates;
//! - `full`: a cascade of `log* n` stages with scale factors
//!   `kappa_1 = ln n, kappa_{i+1} = ln kappa_i` (stopping at 2), finishing
//!   like `example`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::graph::{max_abs, DemandVector, FlowVector, VoltageVector, WeightedGraph};
use crate::pathsum::{materialize_tree_flows, PathSumTree};
use crate::tree::{build_tree_rooted, compute_stretch, SpanningTree, StretchSummary, TreeStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverVariant {
    Simple,
    Example,
    Full,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Target approximation quality; the energy guarantee is
    /// `E[energy] <= (1 + eps) * optimum`.
    pub eps: f64,
    /// Seed for tree construction, cycle sampling and the randomized
    /// stopping tail. Identical (input, options, seed) gives identical
    /// output bits.
    pub seed: u64,
    pub variant: SolverVariant,
    pub tree: TreeStrategy,
    /// Root vertex for tree-induced voltages; potentials are invariant
    /// under this choice up to additive constants.
    pub root: usize,
    /// Overrides the computed update count: exactly this many updates for
    /// `simple`, or the final-stage count for `example`/`full`.
    pub max_iterations: Option<u64>,
    /// Feasibility tolerance; defaults to `1e-9 * (1 + ||chi||_inf)`.
    pub feasibility_tol: Option<f64>,
    /// Stop early once the enumerated duality gap certifies the target
    /// eps. Off by default: the iteration schedules already deliver the
    /// expected-quality guarantee and the certificate costs an
    /// O(m log n) sweep per check.
    pub early_exit: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps: 1e-4,
            seed: 0,
            variant: SolverVariant::Simple,
            tree: TreeStrategy::LowStretch,
            root: 0,
            max_iterations: None,
            feasibility_tol: None,
            early_exit: false,
        }
    }
}

impl SolverOptions {
    pub fn new(eps: f64) -> Self {
        SolverOptions { eps, ..Default::default() }
    }
}

/// Outcome of a solve; energy, dual energy and the residual are recomputed
/// from scratch on the returned flow and voltages, so incremental drift in
/// the update loop is excluded from reported results.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub flow: FlowVector,
    pub voltages: VoltageVector,
    pub energy: f64,
    pub dual_energy: f64,
    pub gap: f64,
    /// Cycle updates executed, including ones that found a zero potential.
    pub iterations: u64,
    /// Updates that moved the flow by a non-negligible amount.
    pub effective_iterations: u64,
    pub seed: u64,
    pub total_stretch: f64,
    pub tau: f64,
    pub residual_inf: f64,
    pub wall_time: Duration,
}

/// Live state of one solve: off-tree flows in an array, tree flows in the
/// path-sum structure, plus the sampler. Single-owner mutable.
pub struct SolverState<'a> {
    g: &'a WeightedGraph,
    tree: &'a SpanningTree,
    summary: &'a StretchSummary,
    ds: PathSumTree,
    off_flow: Vec<f64>,
    /// edge id -> index into the off-tree arrays, u32::MAX for tree edges.
    off_index: Vec<u32>,
    alias: Option<AliasTable>,
    rng: ChaCha8Rng,
    iterations: u64,
    effective: u64,
}

impl<'a> SolverState<'a> {
    fn empty(
        g: &'a WeightedGraph,
        tree: &'a SpanningTree,
        summary: &'a StretchSummary,
        seed: u64,
    ) -> Self {
        let mut off_index = vec![u32::MAX; g.edge_count()];
        for (i, &eid) in summary.off_tree.iter().enumerate() {
            off_index[eid as usize] = i as u32;
        }
        let alias = if summary.probabilities.is_empty() {
            None
        } else {
            Some(AliasTable::new(&summary.probabilities))
        };
        SolverState {
            g,
            tree,
            summary,
            ds: PathSumTree::init(g, tree),
            off_flow: vec![0.0; summary.off_tree.len()],
            off_index,
            alias,
            rng: ChaCha8Rng::seed_from_u64(seed),
            iterations: 0,
            effective: 0,
        }
    }

    /// Starts from the unique tree flow meeting `chi`: routing each
    /// vertex's demand to the root realizes it with one update per vertex.
    pub fn from_demand(
        g: &'a WeightedGraph,
        tree: &'a SpanningTree,
        summary: &'a StretchSummary,
        chi: &DemandVector,
        seed: u64,
    ) -> Result<Self> {
        check_balanced(chi)?;
        if chi.len() != g.vertex_count() {
            return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: chi.len() });
        }
        let mut state = Self::empty(g, tree, summary, seed);
        for v in 0..g.vertex_count() {
            if v != tree.root() && chi[v] != 0.0 {
                state.ds.update(v, -chi[v]);
            }
        }
        Ok(state)
    }

    /// Loads an arbitrary flow (for warm starts between stages).
    pub fn from_flow(
        g: &'a WeightedGraph,
        tree: &'a SpanningTree,
        summary: &'a StretchSummary,
        flow: &FlowVector,
        seed: u64,
    ) -> Result<Self> {
        if flow.len() != g.edge_count() {
            return Err(Error::DimensionMismatch { expected: g.edge_count(), got: flow.len() });
        }
        let mut state = Self::empty(g, tree, summary, seed);
        for (i, &eid) in summary.off_tree.iter().enumerate() {
            state.off_flow[i] = flow[eid as usize];
        }
        // Tree part: update(v, alpha_v) must put flow_away(v) on each parent
        // edge, and the updates below v already contribute the subtree sum.
        let n = g.vertex_count();
        let mut away = vec![0.0; n];
        for v in 0..n {
            if let Some((eid, sign)) = tree.parent_edge(v) {
                away[v] = flow[eid] * sign as f64;
            }
        }
        let mut child_sum = vec![0.0; n];
        for v in 0..n {
            if v != tree.root() {
                child_sum[tree.parent(v)] += away[v];
            }
        }
        for v in 0..n {
            if v != tree.root() {
                let alpha = away[v] - child_sum[v];
                if alpha != 0.0 {
                    state.ds.update(v, alpha);
                }
            }
        }
        Ok(state)
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.g
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn effective_iterations(&self) -> u64 {
        self.effective
    }

    /// Flow-induced potential around the tree cycle of an off-tree edge:
    /// `Delta_e(f) = f(a,b) r_ab - (v(a) - v(b))`.
    pub fn cycle_potential(&self, eid: usize) -> Result<f64> {
        let idx = self.off_index_of(eid)?;
        let e = self.g.edge(eid);
        let va = self.ds.query(e.tail as usize);
        let vb = self.ds.query(e.head as usize);
        Ok(self.off_flow[idx] * e.resistance - (va - vb))
    }

    /// Zeroes the cycle potential on `eid` by subtracting
    /// `(Delta_e / R_e) c_e`: one off-tree entry change plus two path
    /// updates. Returns the applied multiple.
    pub fn cycle_update(&mut self, eid: usize) -> Result<f64> {
        let idx = self.off_index_of(eid)?;
        let e = self.g.edge(eid);
        let (a, b) = (e.tail as usize, e.head as usize);
        let va = self.ds.query(a);
        let vb = self.ds.query(b);
        let drop = self.off_flow[idx] * e.resistance;
        let delta = drop - (va - vb);
        let alpha = delta / self.summary.cycle_resistance[idx];
        self.off_flow[idx] -= alpha;
        if alpha != 0.0 {
            self.ds.update(b, alpha);
            self.ds.update(a, -alpha);
        }
        self.iterations += 1;
        let scale = drop.abs() + va.abs() + vb.abs();
        if delta.abs() > 1e-12 * scale {
            self.effective += 1;
        }
        Ok(alpha)
    }

    /// Draws an off-tree edge id with probability `R_e / (r_e tau)`.
    pub fn sample_edge(&mut self) -> Result<usize> {
        let alias = self.alias.as_ref().ok_or(Error::NoOffTreeEdges)?;
        let idx = alias.sample(&mut self.rng);
        Ok(self.summary.off_tree[idx] as usize)
    }

    /// `v(a) = sum_{e in P(a,s)} f(e) r_e` for every vertex; `v(root) = 0`.
    pub fn tree_induced_voltages(&self) -> VoltageVector {
        VoltageVector((0..self.g.vertex_count()).map(|a| self.ds.query(a)).collect())
    }

    /// Materializes the full flow vector (tree part plus off-tree array).
    pub fn current_flow(&self) -> FlowVector {
        let mut f = materialize_tree_flows(&self.ds, self.g, self.tree);
        for (i, &eid) in self.summary.off_tree.iter().enumerate() {
            f[eid as usize] = self.off_flow[i];
        }
        f
    }

    /// `sum_e Delta_e(f)^2 / r_e` over off-tree edges, which equals the
    /// duality gap of the current flow against its tree voltages.
    pub fn gap_by_enumeration(&self) -> f64 {
        let mut acc = 0.0;
        for &eid in &self.summary.off_tree {
            let delta = self.cycle_potential(eid as usize).expect("off-tree id");
            acc += delta * delta / self.g.edge(eid as usize).resistance;
        }
        acc
    }

    fn off_index_of(&self, eid: usize) -> Result<usize> {
        if eid >= self.g.edge_count() || self.off_index[eid] == u32::MAX {
            return Err(Error::NotOffTree { edge: eid });
        }
        Ok(self.off_index[eid] as usize)
    }
}

fn check_balanced(chi: &DemandVector) -> Result<()> {
    let sum: f64 = chi.as_slice().iter().sum();
    let scale: f64 = chi.as_slice().iter().map(|x| x.abs()).sum();
    if sum.abs() > 1e-9 * (1.0 + scale) {
        return Err(Error::DemandNotBalanced { sum });
    }
    Ok(())
}

/// The unique flow meeting `chi` that is nonzero only on tree edges: on
/// each tree edge the flow equals the net demand hanging below it. One
/// reverse BFS pass.
pub fn initial_tree_flow(
    g: &WeightedGraph,
    tree: &SpanningTree,
    chi: &DemandVector,
) -> Result<FlowVector> {
    check_balanced(chi)?;
    if chi.len() != g.vertex_count() {
        return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: chi.len() });
    }
    let mut subtree_demand: Vec<f64> = chi.as_slice().to_vec();
    let mut f = FlowVector::zeros(g.edge_count());
    for &v in tree.bfs_order().iter().rev() {
        let v = v as usize;
        if v == tree.root() {
            continue;
        }
        let (eid, sign) = tree.parent_edge(v).expect("non-root vertex");
        // Flow away from the root carries minus the subtree's net demand.
        f[eid] = -subtree_demand[v] * sign as f64;
        subtree_demand[tree.parent(v)] += subtree_demand[v];
    }
    Ok(f)
}

/// Divides the tree-edge resistances by `kappa >= 1`, leaving off-tree
/// edges untouched. Feasibility of any flow is unchanged.
pub fn scale_tree(g: &WeightedGraph, tree: &SpanningTree, kappa: f64) -> Result<WeightedGraph> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::BadScale { kappa });
    }
    let resistances: Vec<f64> = (0..g.edge_count())
        .map(|eid| {
            let r = g.edge(eid).resistance;
            if tree.is_tree_edge(eid) {
                r / kappa
            } else {
                r
            }
        })
        .collect();
    Ok(g.with_resistances(resistances))
}

/// Rebuilds the same tree (same edge ids, same root) over a graph with
/// different resistances.
fn rebuild_tree(g: &WeightedGraph, tree: &SpanningTree) -> SpanningTree {
    let ids: Vec<usize> = (0..g.edge_count()).filter(|&e| tree.is_tree_edge(e)).collect();
    build_tree_rooted(g, TreeStrategy::Given(ids), 0, tree.root())
        .expect("tree edges remain a spanning tree")
}

/// Iteration count `ceil(tau * ln(arg))` with the log argument clamped at 1.
fn schedule(tau: f64, arg: f64) -> u64 {
    (tau * arg.max(1.0).ln()).ceil().max(0.0) as u64
}

struct RunOutcome {
    iterations: u64,
}

/// Runs `count` sampled cycle updates; with `early_target` set, checks the
/// enumerated gap every `ceil(tau)` updates and stops once it certifies the
/// target.
fn run_updates(state: &mut SolverState, count: u64, early_target: Option<f64>) -> Result<RunOutcome> {
    let check_every = early_target.map(|_| (state.summary.tau.ceil() as u64).max(1));
    let mut done = 0;
    while done < count {
        let eid = state.sample_edge()?;
        state.cycle_update(eid)?;
        done += 1;
        if let (Some(every), Some(eps)) = (check_every, early_target) {
            if done % every == 0 {
                let gap = state.gap_by_enumeration();
                let energy = state.g.energy(&state.current_flow())?;
                let dual = energy - gap;
                if dual > 0.0 && gap <= eps * dual {
                    break;
                }
            }
        }
    }
    Ok(RunOutcome { iterations: done })
}

fn prologue(
    g: &WeightedGraph,
    chi: &DemandVector,
    options: &SolverOptions,
    master: &mut ChaCha8Rng,
) -> Result<(SpanningTree, StretchSummary)> {
    if !g.is_connected() {
        return Err(Error::GraphDisconnected);
    }
    check_balanced(chi)?;
    if chi.len() != g.vertex_count() {
        return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: chi.len() });
    }
    let tree_seed: u64 = master.random();
    let tree = build_tree_rooted(g, options.tree.clone(), tree_seed, options.root)?;
    let summary = compute_stretch(g, &tree);
    Ok((tree, summary))
}

fn finalize(
    g: &WeightedGraph,
    chi: &DemandVector,
    state: &SolverState,
    options: &SolverOptions,
    iterations: u64,
    effective: u64,
    started: Instant,
) -> Result<SolveReport> {
    let summary = state.summary;
    let flow = state.current_flow();
    let voltages = state.tree_induced_voltages();
    let energy = g.energy(&flow)?;
    let dual_energy = g.dual_energy(&voltages, chi)?;
    let tol = options
        .feasibility_tol
        .unwrap_or_else(|| 1e-9 * (1.0 + max_abs(chi.as_slice())));
    let (_, residual_inf) = g.check_feasible(&flow, chi, tol)?;
    Ok(SolveReport {
        flow,
        voltages,
        energy,
        dual_energy,
        gap: energy - dual_energy,
        iterations,
        effective_iterations: effective,
        seed: options.seed,
        total_stretch: summary.total_stretch,
        tau: summary.tau,
        residual_inf,
        wall_time: started.elapsed(),
    })
}

/// Dispatches on `options.variant`.
pub fn solve(g: &WeightedGraph, chi: &DemandVector, options: &SolverOptions) -> Result<SolveReport> {
    match options.variant {
        SolverVariant::Simple => simple_solver(g, chi, options),
        SolverVariant::Example => example_solver(g, chi, options),
        SolverVariant::Full => full_solver(g, chi, options),
    }
}

/// One pass of `K = ceil(tau ln(st tau / eps))` sampled cycle updates from
/// the initial tree flow.
pub fn simple_solver(
    g: &WeightedGraph,
    chi: &DemandVector,
    options: &SolverOptions,
) -> Result<SolveReport> {
    let started = Instant::now();
    let mut master = ChaCha8Rng::seed_from_u64(options.seed);
    let (tree, summary) = prologue(g, chi, options, &mut master)?;
    let state_seed: u64 = master.random();
    let mut state = SolverState::from_demand(g, &tree, &summary, chi, state_seed)?;
    if summary.off_tree.is_empty() {
        // The tree flow is the exact electrical flow.
        return finalize(g, chi, &state, options, 0, 0, started);
    }
    let k = options.max_iterations.unwrap_or_else(|| {
        schedule(summary.tau, summary.total_stretch * summary.tau / options.eps)
    });
    let early = options.early_exit.then_some(options.eps);
    let out = run_updates(&mut state, k, early)?;
    let effective = state.effective_iterations();
    finalize(g, chi, &state, options, out.iterations, effective, started)
}

/// Warm start on the tree-scaled graph (`kappa = ln n`, target eps 1),
/// then `K = ceil(tau ln(2 ln n / eps))` updates plus a uniformly random
/// tail from `{0, ..., ceil(tau) - 1}`.
pub fn example_solver(
    g: &WeightedGraph,
    chi: &DemandVector,
    options: &SolverOptions,
) -> Result<SolveReport> {
    let started = Instant::now();
    let mut master = ChaCha8Rng::seed_from_u64(options.seed);
    let (tree, summary) = prologue(g, chi, options, &mut master)?;
    if summary.off_tree.is_empty() {
        let state_seed: u64 = master.random();
        let state = SolverState::from_demand(g, &tree, &summary, chi, state_seed)?;
        return finalize(g, chi, &state, options, 0, 0, started);
    }

    let kappa = (g.vertex_count() as f64).ln().max(1.0);
    let scaled = scale_tree(g, &tree, kappa)?;
    let scaled_tree = rebuild_tree(&scaled, &tree);
    let scaled_summary = compute_stretch(&scaled, &scaled_tree);
    let warm_seed: u64 = master.random();
    let mut warm =
        SolverState::from_demand(&scaled, &scaled_tree, &scaled_summary, chi, warm_seed)?;
    let k_warm = schedule(
        scaled_summary.tau,
        scaled_summary.total_stretch * scaled_summary.tau / 1.0,
    );
    let warm_out = run_updates(&mut warm, k_warm, None)?;
    let warm_flow = warm.current_flow();
    let warm_effective = warm.effective_iterations();

    let state_seed: u64 = master.random();
    let mut state = SolverState::from_flow(g, &tree, &summary, &warm_flow, state_seed)?;
    let k_main = options
        .max_iterations
        .unwrap_or_else(|| schedule(summary.tau, 2.0 * kappa / options.eps));
    let k_tail = master.random_range(0..(summary.tau.ceil() as u64).max(1));
    let early = options.early_exit.then_some(options.eps);
    let out = run_updates(&mut state, k_main + k_tail, early)?;
    let iterations = warm_out.iterations + out.iterations;
    let effective = warm_effective + state.effective_iterations();
    finalize(g, chi, &state, options, iterations, effective, started)
}

/// Scale-factor cascade `kappa_1 = ln n, kappa_{i+1} = ln kappa_i` down to
/// 2; stage `i` solves on the graph with the tree scaled by the remaining
/// product and hands its flow to the next stage.
pub fn full_solver(
    g: &WeightedGraph,
    chi: &DemandVector,
    options: &SolverOptions,
) -> Result<SolveReport> {
    let started = Instant::now();
    let mut master = ChaCha8Rng::seed_from_u64(options.seed);
    let (tree, summary) = prologue(g, chi, options, &mut master)?;
    if summary.off_tree.is_empty() {
        let state_seed: u64 = master.random();
        let state = SolverState::from_demand(g, &tree, &summary, chi, state_seed)?;
        return finalize(g, chi, &state, options, 0, 0, started);
    }

    // kappa_1 = ln n, kappa_{i+1} = ln kappa_i, stop once <= 2. Factors are
    // clamped at 1 so scaling stays sound for tiny n.
    let n = g.vertex_count() as f64;
    let mut kappas = vec![n.ln().max(1.0)];
    while *kappas.last().unwrap() > 2.0 {
        let next = kappas.last().unwrap().ln().max(1.0);
        kappas.push(next);
    }
    let c = kappas.len();
    // prod_from[i] = kappa_i * ... * kappa_c (1-indexed); prod_from[c+1] = 1.
    let mut prod_from = vec![1.0; c + 2];
    for i in (1..=c).rev() {
        prod_from[i] = prod_from[i + 1] * kappas[i - 1];
    }

    let m = g.edge_count() as f64;
    let tau = summary.tau;
    let mut flow = initial_tree_flow(g, &tree, chi)?;
    let mut iterations = 0u64;
    let mut effective = 0u64;

    for stage in 1..=c {
        let scaled = scale_tree(g, &tree, prod_from[stage])?;
        let scaled_tree = rebuild_tree(&scaled, &tree);
        let scaled_summary = compute_stretch(&scaled, &scaled_tree);
        let seed: u64 = master.random();
        let mut state =
            SolverState::from_flow(&scaled, &scaled_tree, &scaled_summary, &flow, seed)?;
        let k = if stage == 1 {
            schedule(tau / prod_from[1] + m, scaled_summary.total_stretch)
        } else {
            schedule(tau / prod_from[stage] + m, 2.0 * kappas[stage - 2] - 1.0)
        };
        let out = run_updates(&mut state, k, None)?;
        iterations += out.iterations;
        effective += state.effective_iterations();
        flow = state.current_flow();
    }

    // Final stage on the original graph.
    let seed: u64 = master.random();
    let mut state = SolverState::from_flow(g, &tree, &summary, &flow, seed)?;
    let k_final = options.max_iterations.unwrap_or_else(|| {
        schedule(tau + m, (2.0 * kappas[c - 1] - 1.0) / options.eps)
    });
    let k_tail = master.random_range(0..(tau.ceil() as u64).max(1));
    let early = options.early_exit.then_some(options.eps);
    let out = run_updates(&mut state, k_final + k_tail, early)?;
    iterations += out.iterations;
    effective += state.effective_iterations();
    finalize(g, chi, &state, options, iterations, effective, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::build_graph;
    use crate::oracle::{dense_oracle, DEFAULT_ORACLE_CAP};
    use crate::reference::cycle_potential_by_walk;
    use crate::tree::build_tree;

    fn k3_setup() -> (WeightedGraph, SpanningTree, StretchSummary, DemandVector) {
        let g = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let t = build_tree(&g, TreeStrategy::Given(vec![0, 1]), 0).unwrap();
        let s = compute_stretch(&g, &t);
        let chi = DemandVector(vec![1.0, 0.0, -1.0]);
        (g, t, s, chi)
    }

    #[test]
    fn initial_tree_flow_on_k3() {
        let (g, t, _, chi) = k3_setup();
        let f0 = initial_tree_flow(&g, &t, &chi).unwrap();
        assert_eq!(f0.as_slice(), &[1.0, 1.0, 0.0]);
        let (ok, _) = g.check_feasible(&f0, &chi, 1e-12).unwrap();
        assert!(ok);

        let zero = initial_tree_flow(&g, &t, &DemandVector::zeros(3)).unwrap();
        assert!(zero.as_slice().iter().all(|&x| x == 0.0));

        assert!(matches!(
            initial_tree_flow(&g, &t, &DemandVector(vec![1.0, 0.0, 0.0])),
            Err(Error::DemandNotBalanced { .. })
        ));
    }

    #[test]
    fn initial_tree_flow_on_star() {
        let g = gen::star_graph(4);
        let t = build_tree(&g, TreeStrategy::MinResistance, 0).unwrap();
        let mut chi = DemandVector::zeros(4);
        chi[1] = 1.0;
        chi[3] = -1.0;
        let f0 = initial_tree_flow(&g, &t, &chi).unwrap();
        let (ok, _) = g.check_feasible(&f0, &chi, 1e-12).unwrap();
        assert!(ok);
        // One unit on the two leaf edges, nothing on the third.
        let nonzero: Vec<f64> = f0.as_slice().iter().filter(|x| **x != 0.0).map(|x| x.abs()).collect();
        assert_eq!(nonzero, vec![1.0, 1.0]);
    }

    #[test]
    fn cycle_potential_fixture() {
        let (g, t, s, chi) = k3_setup();
        let state = SolverState::from_demand(&g, &t, &s, &chi, 1).unwrap();
        let delta = state.cycle_potential(2).unwrap();
        assert!((delta + 2.0).abs() < 1e-12);
        assert!(matches!(state.cycle_potential(0), Err(Error::NotOffTree { edge: 0 })));
    }

    #[test]
    fn cycle_potential_matches_walk_on_random_states() {
        use rand::{Rng, SeedableRng};
        for seed in 0..4u64 {
            let g = gen::random_connected_graph(24, 60, (0.3, 7.0), 40 + seed);
            let t = build_tree(&g, TreeStrategy::LowStretch, seed).unwrap();
            let s = compute_stretch(&g, &t);
            let chi = gen::random_balanced_demand(24, 80 + seed);
            let mut state = SolverState::from_demand(&g, &t, &s, &chi, seed).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..30 {
                let eid = state.sample_edge().unwrap();
                if rng.random::<f64>() < 0.7 {
                    state.cycle_update(eid).unwrap();
                }
            }
            let f = state.current_flow();
            for &eid in &s.off_tree {
                let fast = state.cycle_potential(eid as usize).unwrap();
                let slow = cycle_potential_by_walk(&g, &t, &f, eid as usize);
                assert!(
                    (fast - slow).abs() <= 1e-9 * (1.0 + slow.abs()),
                    "edge {eid}: {fast} vs {slow}"
                );
            }
        }
    }

    #[test]
    fn cycle_update_reaches_k3_optimum_in_one_step() {
        let (g, t, s, chi) = k3_setup();
        let mut state = SolverState::from_demand(&g, &t, &s, &chi, 1).unwrap();
        state.cycle_update(2).unwrap();
        let f = state.current_flow();
        assert!((f[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f[2] - 2.0 / 3.0).abs() < 1e-12);
        assert!((g.energy(&f).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        // Potential is now zero and a second update is a no-op.
        assert!(state.cycle_potential(2).unwrap().abs() < 1e-12);
        let alpha = state.cycle_update(2).unwrap();
        assert!(alpha.abs() < 1e-12);
        assert_eq!(state.effective_iterations(), 1);
    }

    #[test]
    fn cycle_update_energy_decrease_is_delta_sq_over_r() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for seed in 0..4u64 {
            let g = gen::random_connected_graph(20, 45, (0.5, 5.0), 300 + seed);
            let t = build_tree(&g, TreeStrategy::LowStretch, seed).unwrap();
            let s = compute_stretch(&g, &t);
            let chi = gen::random_balanced_demand(20, 400 + seed);
            let mut state = SolverState::from_demand(&g, &t, &s, &chi, seed).unwrap();
            for _ in 0..25 {
                use rand::Rng;
                let idx = rng.random_range(0..s.off_tree.len());
                let eid = s.off_tree[idx] as usize;
                let before = g.energy(&state.current_flow()).unwrap();
                let delta = state.cycle_potential(eid).unwrap();
                state.cycle_update(eid).unwrap();
                let after = g.energy(&state.current_flow()).unwrap();
                let expected_drop = delta * delta / s.cycle_resistance[s.off_tree.iter().position(|&e| e as usize == eid).unwrap()];
                assert!(
                    ((before - after) - expected_drop).abs() <= 1e-9 * (1.0 + before),
                    "decrease {} vs Delta^2/R {}",
                    before - after,
                    expected_drop
                );
                let residual = state.cycle_potential(eid).unwrap();
                assert!(residual.abs() <= 1e-9 * delta.abs() + 1e-12);
            }
        }
    }

    #[test]
    fn feasibility_preserved_through_updates() {
        let g = gen::random_connected_graph(30, 70, (0.2, 10.0), 17);
        let t = build_tree(&g, TreeStrategy::LowStretch, 3).unwrap();
        let s = compute_stretch(&g, &t);
        let chi = gen::random_balanced_demand(30, 18);
        let mut state = SolverState::from_demand(&g, &t, &s, &chi, 4).unwrap();
        let tol = 1e-8 * (1.0 + max_abs(chi.as_slice()));
        for i in 0..200 {
            let eid = state.sample_edge().unwrap();
            state.cycle_update(eid).unwrap();
            if i % 40 == 0 {
                let (ok, res) = g.check_feasible(&state.current_flow(), &chi, tol).unwrap();
                assert!(ok, "iteration {i}: residual {res}");
            }
        }
    }

    #[test]
    fn sampler_frequencies_match_probabilities() {
        // Two off-tree edges with R/r = 3 and 1 under a forced tree.
        // Path 0-1 with r=1; chords (0,2),(1,2) arranged so the ratio holds.
        // Use K3 plus a pendant to get two off-tree edges with known R/r.
        let g = build_graph(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0), (0, 3, 3.0)],
        )
        .unwrap();
        let t = build_tree(&g, TreeStrategy::Given(vec![0, 1, 3]), 0).unwrap();
        let s = compute_stretch(&g, &t);
        // Edge (0,2): cycle r = 1+2 = 3, R/r = 3. Edge (0,3): r=3, path 0-1-2-3 = 3, R/r = 2.
        let chi = DemandVector::zeros(4);
        let mut state = SolverState::from_demand(&g, &t, &s, &chi, 99).unwrap();
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(state.sample_edge().unwrap()).or_insert(0usize) += 1;
        }
        for (i, &eid) in s.off_tree.iter().enumerate() {
            let f = counts[&(eid as usize)] as f64 / draws as f64;
            assert!(
                (f - s.probabilities[i]).abs() < 0.01,
                "edge {eid}: {f} vs {}",
                s.probabilities[i]
            );
        }
    }

    #[test]
    fn single_off_tree_edge_always_sampled() {
        let (g, t, s, chi) = k3_setup();
        let mut state = SolverState::from_demand(&g, &t, &s, &chi, 5).unwrap();
        for _ in 0..50 {
            assert_eq!(state.sample_edge().unwrap(), 2);
        }
    }

    #[test]
    fn tree_induced_voltages_fixture() {
        let (g, t, s, chi) = k3_setup();
        let mut state = SolverState::from_demand(&g, &t, &s, &chi, 1).unwrap();
        state.cycle_update(2).unwrap();
        let v = state.tree_induced_voltages();
        assert!(v[0].abs() < 1e-12);
        assert!((v[1] + 1.0 / 3.0).abs() < 1e-12);
        assert!((v[2] + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tree_only_graph_solves_exactly_in_zero_iterations() {
        let g = gen::random_tree(40, (0.5, 5.0), 7);
        let chi = gen::random_balanced_demand(40, 8);
        for variant in [SolverVariant::Simple, SolverVariant::Example, SolverVariant::Full] {
            let options = SolverOptions { variant, ..SolverOptions::new(1e-3) };
            let report = solve(&g, &chi, &options).unwrap();
            assert_eq!(report.iterations, 0);
            // Tree voltages satisfy L v = chi.
            let lv = g.apply_laplacian(&report.voltages).unwrap();
            for a in 0..40 {
                assert!((lv[a] - chi[a]).abs() < 1e-9 * (1.0 + chi[a].abs()));
            }
        }
    }

    #[test]
    fn solvers_hit_eps_on_k3() {
        let (g, _, _, chi) = k3_setup();
        for (variant, eps) in [
            (SolverVariant::Simple, 0.1),
            (SolverVariant::Example, 0.01),
            (SolverVariant::Full, 1e-6),
        ] {
            let options = SolverOptions {
                variant,
                tree: TreeStrategy::Given(vec![0, 1]),
                ..SolverOptions::new(eps)
            };
            let report = solve(&g, &chi, &options).unwrap();
            assert!(
                report.energy <= (1.0 + eps) * (2.0 / 3.0) + 1e-12,
                "{variant:?}: energy {}",
                report.energy
            );
        }
    }

    #[test]
    fn scale_tree_identity_and_fixture() {
        let (g, t, s, _) = k3_setup();
        let same = scale_tree(&g, &t, 1.0).unwrap();
        for e in 0..3 {
            assert_eq!(same.edge(e).resistance, g.edge(e).resistance);
        }

        let halved = scale_tree(&g, &t, 2.0).unwrap();
        let t2 = build_tree(&halved, TreeStrategy::Given(vec![0, 1]), 0).unwrap();
        let s2 = compute_stretch(&halved, &t2);
        assert!((s2.cycle_resistance[0] - 2.0).abs() < 1e-15);
        assert!((s2.tau - 2.0).abs() < 1e-15);
        // Exact scaling identity: tau' = tau/k + (m - n + 1)(1 - 1/k).
        let m_off = 1.0;
        assert!((s2.tau - (s.tau / 2.0 + m_off * 0.5)).abs() < 1e-12);
        // And the coarser upper bound tau' <= tau/k + (m - n + 1).
        assert!(s2.tau <= s.tau / 2.0 + m_off + 1e-12);

        assert!(matches!(scale_tree(&g, &t, 0.5), Err(Error::BadScale { .. })));
    }

    #[test]
    fn scaled_solve_energy_bound() {
        // An eps-approximate flow for the scaled graph stays within
        // kappa (1 + eps) of the original optimum.
        for seed in 0..3u64 {
            let g = gen::random_connected_graph(24, 55, (0.5, 6.0), 900 + seed);
            let t = build_tree(&g, TreeStrategy::LowStretch, seed).unwrap();
            let chi = gen::random_balanced_demand(24, 901 + seed);
            let kappa = 3.0;
            let scaled = scale_tree(&g, &t, kappa).unwrap();
            let scaled_tree = rebuild_tree(&scaled, &t);
            let ss = compute_stretch(&scaled, &scaled_tree);
            let eps = 0.5;
            let mut state = SolverState::from_demand(&scaled, &scaled_tree, &ss, &chi, seed).unwrap();
            let k = schedule(ss.tau, ss.total_stretch * ss.tau / eps);
            run_updates(&mut state, k, None).unwrap();
            let f = state.current_flow();
            let opt = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap().energy;
            let energy = g.energy(&f).unwrap();
            assert!(
                energy <= kappa * (1.0 + eps) * opt * (1.0 + 1e-9),
                "seed {seed}: {energy} vs bound {}",
                kappa * (1.0 + eps) * opt
            );
        }
    }

    #[test]
    fn example_solver_meets_both_bounds_over_seeds() {
        // Median over seeds of energy and voltage quality against the
        // dense reference.
        let g = gen::random_connected_graph(60, 170, (1.0, 40.0), 1200);
        let chi = gen::random_balanced_demand(60, 1201);
        let oracle_res = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap();
        let eps = 0.05;
        let mut e_ratios = Vec::new();
        let mut v_ratios = Vec::new();
        for seed in 0..10u64 {
            let options =
                SolverOptions { seed, variant: SolverVariant::Example, ..SolverOptions::new(eps) };
            let report = example_solver(&g, &chi, &options).unwrap();
            e_ratios.push(report.energy / oracle_res.energy);
            let v_err = crate::oracle::laplacian_norm_of_difference(
                &g,
                report.voltages.as_slice(),
                oracle_res.voltages.as_slice(),
            );
            v_ratios.push(v_err / (eps.sqrt() * oracle_res.energy.sqrt()));
        }
        e_ratios.sort_by(|a, b| a.total_cmp(b));
        v_ratios.sort_by(|a, b| a.total_cmp(b));
        assert!(e_ratios[5] <= 1.0 + eps, "median energy ratio {}", e_ratios[5]);
        assert!(v_ratios[5] <= 1.0, "median voltage ratio {}", v_ratios[5]);
    }

    #[test]
    fn custom_root_shifts_voltages_only() {
        let g = gen::random_connected_graph(30, 70, (0.5, 6.0), 55);
        let chi = gen::random_balanced_demand(30, 56);
        let base = SolverOptions {
            seed: 9,
            variant: SolverVariant::Simple,
            tree: TreeStrategy::MinResistance,
            ..SolverOptions::new(0.01)
        };
        let at0 = simple_solver(&g, &chi, &base).unwrap();
        let at5 = simple_solver(&g, &chi, &SolverOptions { root: 5, ..base.clone() }).unwrap();
        assert_eq!(at5.voltages[5], 0.0);
        // Same flow, voltages differ by a constant.
        for e in 0..g.edge_count() {
            assert!((at0.flow[e] - at5.flow[e]).abs() <= 1e-9 * (1.0 + at0.flow[e].abs()));
        }
        let shift = at0.voltages[0] - at5.voltages[0];
        for v in 0..30 {
            assert!(
                (at0.voltages[v] - at5.voltages[v] - shift).abs() <= 1e-9,
                "vertex {v}"
            );
        }
    }

    #[test]
    fn extreme_resistance_range_solves() {
        // Twelve orders of magnitude between the lightest and heaviest edge.
        let g = gen::random_connected_graph(40, 100, (1e-6, 1e6), 66);
        let chi = gen::random_balanced_demand(40, 67);
        let opt = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap().energy;
        let eps = 0.1;
        let report = simple_solver(
            &g,
            &chi,
            &SolverOptions { seed: 4, ..SolverOptions::new(eps) },
        )
        .unwrap();
        assert!(
            report.energy <= (1.0 + eps) * opt * (1.0 + 1e-9),
            "energy {} vs opt {opt}",
            report.energy
        );
        let tol = 1e-8 * (1.0 + max_abs(chi.as_slice()));
        assert!(report.residual_inf <= tol, "residual {}", report.residual_inf);
    }

    #[test]
    fn tree_only_solve_has_zero_gap() {
        let g = gen::random_tree(25, (0.5, 4.0), 31);
        let chi = gen::random_balanced_demand(25, 32);
        let report = simple_solver(&g, &chi, &SolverOptions::new(0.1)).unwrap();
        assert!(report.gap.abs() <= 1e-9 * (1.0 + report.energy));
    }

    #[test]
    fn deterministic_given_seed() {
        let g = gen::random_connected_graph(40, 100, (0.5, 8.0), 1);
        let chi = gen::random_balanced_demand(40, 2);
        let options = SolverOptions { seed: 1234, ..SolverOptions::new(0.05) };
        let a = simple_solver(&g, &chi, &options).unwrap();
        let b = simple_solver(&g, &chi, &options).unwrap();
        assert_eq!(a.flow.as_slice(), b.flow.as_slice());
        assert_eq!(a.voltages.as_slice(), b.voltages.as_slice());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn disconnected_and_unbalanced_rejected() {
        let g = build_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let chi = DemandVector(vec![1.0, -1.0, 0.0, 0.0]);
        assert!(matches!(
            simple_solver(&g, &chi, &SolverOptions::new(0.1)),
            Err(Error::GraphDisconnected)
        ));

        let g = gen::cycle_graph(4);
        let chi = DemandVector(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            simple_solver(&g, &chi, &SolverOptions::new(0.1)),
            Err(Error::DemandNotBalanced { .. })
        ));
    }

    #[test]
    fn early_exit_stops_sooner_and_still_meets_eps() {
        let g = gen::random_connected_graph(50, 130, (1.0, 40.0), 77);
        let chi = gen::random_balanced_demand(50, 78);
        let eps = 0.1;
        let plain = simple_solver(&g, &chi, &SolverOptions { seed: 5, ..SolverOptions::new(eps) }).unwrap();
        let early = simple_solver(
            &g,
            &chi,
            &SolverOptions { seed: 5, early_exit: true, ..SolverOptions::new(eps) },
        )
        .unwrap();
        assert!(early.iterations <= plain.iterations);
        let opt = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap().energy;
        assert!(early.energy <= (1.0 + eps) * opt * (1.0 + 1e-9));
    }
}
