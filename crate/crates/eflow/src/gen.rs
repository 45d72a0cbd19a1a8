//! Seeded instance generators used by the test suites, benchmarks and the
//! verification harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{build_graph, DemandVector, WeightedGraph};

/// Connected graph with `n` vertices and roughly `m` edges: a random
/// spanning tree plus random chords, resistances uniform in `r_range`.
pub fn random_connected_graph(
    n: usize,
    m: usize,
    r_range: (f64, f64),
    seed: u64,
) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = r_range;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        let p = rng.random_range(0..v);
        edges.push((p, v, rng.random_range(lo..hi)));
        seen.insert((p.min(v), p.max(v)));
    }
    let extra = m.saturating_sub(n - 1);
    let mut attempts = 0;
    while edges.len() < n - 1 + extra && attempts < 20 * m + 100 {
        attempts += 1;
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push((a, b, rng.random_range(lo..hi)));
        }
    }
    build_graph(n, &edges).expect("generated edges are valid")
}

/// Random demand vector with entries shifted to sum to zero exactly up to
/// rounding.
pub fn random_balanced_demand(n: usize, seed: u64) -> DemandVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = chi.iter().sum::<f64>() / n as f64;
    for x in chi.iter_mut() {
        *x -= mean;
    }
    DemandVector(chi)
}

/// Width x height grid with unit resistances.
pub fn grid_graph(width: usize, height: usize) -> WeightedGraph {
    let idx = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push((idx(x, y), idx(x + 1, y), 1.0));
            }
            if y + 1 < height {
                edges.push((idx(x, y), idx(x, y + 1), 1.0));
            }
        }
    }
    build_graph(width * height, &edges).unwrap()
}

/// Path 0 - 1 - ... - (n-1) with unit resistances.
pub fn path_graph(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (0..n - 1).map(|v| (v, v + 1, 1.0)).collect();
    build_graph(n, &edges).unwrap()
}

/// Cycle on `n` vertices with unit resistances.
pub fn cycle_graph(n: usize) -> WeightedGraph {
    let mut edges: Vec<_> = (0..n - 1).map(|v| (v, v + 1, 1.0)).collect();
    edges.push((0, n - 1, 1.0));
    build_graph(n, &edges).unwrap()
}

/// Star with center 0 and unit resistances.
pub fn star_graph(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..n).map(|v| (0, v, 1.0)).collect();
    build_graph(n, &edges).unwrap()
}

/// Random tree on `n` vertices (uniform random attachment) with resistances
/// in `r_range`; vertex labels are shuffled so layout does not follow id
/// order.
pub fn random_tree(n: usize, r_range: (f64, f64), seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut relabel: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        relabel.swap(i, j);
    }
    let (lo, hi) = r_range;
    let edges: Vec<_> = (1..n)
        .map(|v| {
            let p = rng.random_range(0..v);
            (relabel[p], relabel[v], rng.random_range(lo..hi))
        })
        .collect();
    build_graph(n, &edges).unwrap()
}
