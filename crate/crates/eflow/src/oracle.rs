//! Dense desk-scale oracle: full symmetric eigendecomposition of the
//! Laplacian, pseudoinverse voltages `L^+ chi`, the optimal electrical flow,
//! and the dense projection operators used by the verification harness.
//!
//! The oracle deliberately uses a direct eigensolver (Householder
//! tridiagonalization followed by implicit QL) rather than any iterative
//! method, so validating the iterative solvers against it is not circular.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{DemandVector, FlowVector, VoltageVector, WeightedGraph};
use crate::tree::SpanningTree;

/// Default dimension cap for dense-oracle computations.
pub const DEFAULT_ORACLE_CAP: usize = 2000;

/// Eigendecomposition of a symmetric matrix: `a = V diag(values) V^T` with
/// eigenvalues ascending and eigenvectors in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Householder reduction to tridiagonal form, accumulating the orthogonal
/// transformation in `v`. Classic EISPACK tred2.
fn tred2(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
                v[[j, i]] = 0.0;
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] -= f * e[k] + g * d[k];
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = 0.0;
    }
    v[[n - 1, n - 1]] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix. Classic
/// EISPACK tql2; eigenvectors are accumulated into `v`.
fn tql2(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                assert!(iter <= 64, "tql2 failed to converge");

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &Array2<f64>) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return SymmetricEigen { values: vec![], vectors: Array2::zeros((0, 0)) };
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        return SymmetricEigen { values: vec![a[[0, 0]]], vectors: Array2::eye(1) };
    }
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = v[[row, i]];
        }
    }
    SymmetricEigen { values, vectors }
}

impl SymmetricEigen {
    /// Applies the Moore-Penrose pseudoinverse: eigenvalues with magnitude
    /// below `rel_tol * max|lambda|` are treated as zero.
    pub fn pseudoinverse_apply(&self, rhs: &[f64], rel_tol: f64) -> Vec<f64> {
        let n = self.values.len();
        assert_eq!(rhs.len(), n);
        let lmax = self.values.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let cutoff = rel_tol * lmax.max(1e-300);
        let mut out = vec![0.0; n];
        for (k, &lambda) in self.values.iter().enumerate() {
            if lambda.abs() <= cutoff {
                continue;
            }
            let mut proj = 0.0;
            for i in 0..n {
                proj += self.vectors[[i, k]] * rhs[i];
            }
            let scale = proj / lambda;
            for i in 0..n {
                out[i] += scale * self.vectors[[i, k]];
            }
        }
        out
    }

    /// Number of eigenvalues treated as zero at the given relative cutoff.
    pub fn null_dimension(&self, rel_tol: f64) -> usize {
        let lmax = self.values.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        let cutoff = rel_tol * lmax.max(1e-300);
        self.values.iter().filter(|l| l.abs() <= cutoff).count()
    }
}

/// Dense Laplacian of the graph.
pub fn dense_laplacian(g: &WeightedGraph) -> Array2<f64> {
    let n = g.vertex_count();
    let mut l = Array2::zeros((n, n));
    for e in g.edges() {
        let w = e.conductance();
        let (a, b) = (e.tail as usize, e.head as usize);
        l[[a, a]] += w;
        l[[b, b]] += w;
        l[[a, b]] -= w;
        l[[b, a]] -= w;
    }
    l
}

/// Dense reference solution: optimal voltages `L^+ chi`, the optimal flow
/// and its energy, plus spectrum diagnostics.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub flow: FlowVector,
    pub voltages: VoltageVector,
    pub energy: f64,
    pub lambda_max: f64,
    pub lambda_min_positive: f64,
    pub null_dimension: usize,
}

const NULL_SPACE_REL_TOL: f64 = 1e-10;

/// Computes `v* = L^+ chi` by full eigendecomposition and the optimal flow
/// `f* = R^{-1} B v*`.
pub fn dense_oracle(g: &WeightedGraph, chi: &DemandVector, cap: usize) -> Result<OracleResult> {
    let n = g.vertex_count();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if chi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: chi.len() });
    }
    let eig = symmetric_eigen(&dense_laplacian(g));
    let v = eig.pseudoinverse_apply(chi.as_slice(), NULL_SPACE_REL_TOL);
    let flow: Vec<f64> = g
        .edges()
        .iter()
        .map(|e| (v[e.tail as usize] - v[e.head as usize]) / e.resistance)
        .collect();
    let flow = FlowVector(flow);
    let voltages = VoltageVector(v);
    let energy = g.energy(&flow)?;
    let dual = g.dual_energy(&voltages, chi)?;
    // Strong duality holds at the optimum; a violation signals chi was not
    // balanced per component.
    if (energy - dual).abs() > 1e-8 * (1.0 + energy.abs()) {
        return Err(Error::DemandNotBalanced { sum: energy - dual });
    }
    let lambda_max = eig.values.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let lambda_min_positive = eig
        .values
        .iter()
        .copied()
        .filter(|&l| l > NULL_SPACE_REL_TOL * lambda_max.max(1e-300))
        .fold(f64::INFINITY, f64::min);
    let null_dimension = eig.null_dimension(NULL_SPACE_REL_TOL);
    Ok(OracleResult { flow, voltages, energy, lambda_max, lambda_min_positive, null_dimension })
}

/// `||x - y||_L` over the graph's Laplacian quadratic form.
pub fn laplacian_norm_of_difference(g: &WeightedGraph, x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let v = VoltageVector(diff);
    let lv = g.apply_laplacian(&v).expect("dimension checked by caller");
    let quad: f64 = v.as_slice().iter().zip(lv.as_slice()).map(|(a, b)| a * b).sum();
    quad.max(0.0).sqrt()
}

/// Dense projection operators for the operator-approximation checks:
/// `pi_g = R^{-1/2} B L^+ B^T R^{-1/2}` plus the normalized tree-cycle
/// directions, one per off-tree edge (so `pi_e = I - c c^T`).
pub struct ProjectionMatrices {
    pub pi_g: Array2<f64>,
    /// Off-tree edge ids paired with the unit cycle direction `R^{1/2} c_e / sqrt(R_e)`.
    pub cycle_directions: Vec<(usize, Vec<f64>)>,
}

pub fn build_projection_matrices(
    g: &WeightedGraph,
    tree: &SpanningTree,
    cap: usize,
) -> Result<ProjectionMatrices> {
    let n = g.vertex_count();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let m = g.edge_count();
    let eig = symmetric_eigen(&dense_laplacian(g));

    // Column e2 of B L^+ B^T is (L^+ (e_a - e_b)) differenced over edges.
    let mut pi_g = Array2::zeros((m, m));
    for (e2, edge2) in g.edges().iter().enumerate() {
        let mut rhs = vec![0.0; n];
        rhs[edge2.tail as usize] = 1.0;
        rhs[edge2.head as usize] = -1.0;
        let y = eig.pseudoinverse_apply(&rhs, NULL_SPACE_REL_TOL);
        for (e1, edge1) in g.edges().iter().enumerate() {
            let val = (y[edge1.tail as usize] - y[edge1.head as usize])
                / (edge1.resistance * edge2.resistance).sqrt();
            pi_g[[e1, e2]] = val;
        }
    }

    let mut cycle_directions = Vec::with_capacity(tree.off_tree_edges().len());
    for &eid in tree.off_tree_edges() {
        let c = tree.cycle_vector(g, eid as usize);
        let norm_sq: f64 = g
            .edges()
            .iter()
            .zip(&c)
            .map(|(e, &ce)| e.resistance * ce * ce)
            .sum();
        let inv = 1.0 / norm_sq.sqrt();
        let dir: Vec<f64> = g
            .edges()
            .iter()
            .zip(&c)
            .map(|(e, &ce)| e.resistance.sqrt() * ce * inv)
            .collect();
        cycle_directions.push((eid as usize, dir));
    }
    Ok(ProjectionMatrices { pi_g, cycle_directions })
}

impl ProjectionMatrices {
    pub fn dimension(&self) -> usize {
        self.pi_g.nrows()
    }

    /// Materializes `pi_e = I - c c^T` for one off-tree edge.
    pub fn cycle_projector(&self, idx: usize) -> Array2<f64> {
        let m = self.dimension();
        let c = &self.cycle_directions[idx].1;
        let mut p = Array2::eye(m);
        for i in 0..m {
            for j in 0..m {
                p[[i, j]] -= c[i] * c[j];
            }
        }
        p
    }

    /// Applies `pi_e` in place to an accumulated product matrix:
    /// `M := (I - c c^T) M`, a rank-one update.
    pub fn apply_cycle_projector(&self, idx: usize, m: &mut Array2<f64>) {
        let dim = self.dimension();
        let c = &self.cycle_directions[idx].1;
        let mut ctm = vec![0.0; dim];
        for i in 0..dim {
            let ci = c[i];
            if ci == 0.0 {
                continue;
            }
            for j in 0..dim {
                ctm[j] += ci * m[[i, j]];
            }
        }
        for i in 0..dim {
            let ci = c[i];
            if ci == 0.0 {
                continue;
            }
            for j in 0..dim {
                m[[i, j]] -= ci * ctm[j];
            }
        }
    }

    /// Squared Frobenius distance `||M - pi_g||_F^2`.
    pub fn frobenius_distance_sq(&self, m: &Array2<f64>) -> f64 {
        let dim = self.dimension();
        let mut acc = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let d = m[[i, j]] - self.pi_g[[i, j]];
                acc += d * d;
            }
        }
        acc
    }
}

/// One seeded trial of the projection-product approximation: samples
/// `K = ceil(tau ln(n/(eps p)))` off-tree edges from the cycle distribution,
/// accumulates the product of their projections by rank-one updates, and
/// returns the squared Frobenius distance to `pi_g`.
pub fn operator_approx_trial(
    matrices: &ProjectionMatrices,
    summary: &crate::tree::StretchSummary,
    n: usize,
    eps: f64,
    p: f64,
    seed: u64,
) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let table = crate::alias::AliasTable::new(&summary.probabilities);
    let k = (summary.tau * (n as f64 / (eps * p)).ln()).ceil().max(1.0) as usize;
    let dim = matrices.dimension();
    let mut product = Array2::eye(dim);
    for _ in 0..k {
        let idx = table.sample(&mut rng);
        matrices.apply_cycle_projector(idx, &mut product);
    }
    matrices.frobenius_distance_sq(&product)
}

/// Runs `trials` seeded trials and counts how many land within eps.
pub fn operator_approx_pass_count(
    g: &WeightedGraph,
    tree: &SpanningTree,
    summary: &crate::tree::StretchSummary,
    eps: f64,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    let matrices = build_projection_matrices(g, tree, 50)?;
    let mut passes = 0;
    for t in 0..trials {
        let dist = operator_approx_trial(&matrices, summary, g.vertex_count(), eps, p, seed ^ (t as u64).wrapping_mul(0x9E3779B97F4A7C15));
        if dist <= eps {
            passes += 1;
        }
    }
    Ok(passes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::build_graph;

    #[test]
    fn eigen_of_known_matrix() {
        // Eigenvalues of [[2,1],[1,2]] are 1 and 3.
        let a = ndarray::arr2(&[[2.0, 1.0], [1.0, 2.0]]);
        let eig = symmetric_eigen(&a);
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 3.0).abs() < 1e-12);
        // Reconstruction a = V diag V^T.
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..2 {
                    acc += eig.vectors[[i, k]] * eig.values[k] * eig.vectors[[j, k]];
                }
                assert!((acc - a[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_reconstructs_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 8, 17, 40] {
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                for j in i..n {
                    let x = rng.random_range(-1.0..1.0);
                    a[[i, j]] = x;
                    a[[j, i]] = x;
                }
            }
            let eig = symmetric_eigen(&a);
            let scale: f64 = eig.values.iter().fold(1.0f64, |m, &l| m.max(l.abs()));
            // Orthonormality of eigenvectors.
            for c1 in 0..n {
                for c2 in 0..n {
                    let dot: f64 = (0..n).map(|r| eig.vectors[[r, c1]] * eig.vectors[[r, c2]]).sum();
                    let expect = if c1 == c2 { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-10, "n={n} c1={c1} c2={c2} dot={dot}");
                }
            }
            // Reconstruction.
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += eig.vectors[[i, k]] * eig.values[k] * eig.vectors[[j, k]];
                    }
                    assert!((acc - a[[i, j]]).abs() < 1e-10 * scale, "n={n}");
                }
            }
        }
    }

    #[test]
    fn oracle_on_k3() {
        let g = build_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let chi = DemandVector(vec![1.0, 0.0, -1.0]);
        let res = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap();
        assert!((res.energy - 2.0 / 3.0).abs() < 1e-12);
        assert!((res.flow[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((res.flow[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((res.flow[2] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(res.null_dimension, 1);
        // L^+ chi is mean-zero.
        let mean: f64 = res.voltages.as_slice().iter().sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn oracle_on_c4_opposite_corners() {
        // Cycle 0-1-2-3-0; chi = e0 - e2 splits half/half over two 2-edge paths.
        let g = gen::cycle_graph(4);
        let chi = DemandVector(vec![1.0, 0.0, -1.0, 0.0]);
        let res = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap();
        assert!((res.energy - 1.0).abs() < 1e-12);
        for f in res.flow.as_slice() {
            assert!((f.abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_zero_demand() {
        let g = gen::cycle_graph(4);
        let chi = DemandVector::zeros(4);
        let res = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(res.energy, 0.0);
        assert!(res.flow.as_slice().iter().all(|&f| f == 0.0));
    }

    #[test]
    fn oracle_respects_cap() {
        let g = gen::path_graph(10);
        let chi = DemandVector::zeros(10);
        assert!(matches!(
            dense_oracle(&g, &chi, 5),
            Err(Error::TooLarge { n: 10, cap: 5 })
        ));
    }

    #[test]
    fn projection_matrices_are_projectors() {
        let g = gen::random_connected_graph(12, 26, (0.5, 4.0), 21);
        let t = crate::tree::build_tree(&g, crate::tree::TreeStrategy::LowStretch, 2).unwrap();
        let pm = build_projection_matrices(&g, &t, 50).unwrap();
        let m = pm.dimension();

        // Trace of pi_g is n - 1 on a connected graph.
        let trace: f64 = (0..m).map(|i| pm.pi_g[[i, i]]).sum();
        assert!((trace - 11.0).abs() < 1e-9, "trace {trace}");

        // pi_g symmetric and idempotent.
        for i in 0..m {
            for j in 0..m {
                assert!((pm.pi_g[[i, j]] - pm.pi_g[[j, i]]).abs() < 1e-9);
            }
        }
        let sq = pm.pi_g.dot(&pm.pi_g);
        for i in 0..m {
            for j in 0..m {
                assert!((sq[[i, j]] - pm.pi_g[[i, j]]).abs() < 1e-9);
            }
        }

        // Each cycle projector is idempotent and fixes the range of pi_g:
        // pi_g pi_e pi_g = pi_g.
        for idx in 0..pm.cycle_directions.len() {
            let pe = pm.cycle_projector(idx);
            let pe_sq = pe.dot(&pe);
            for i in 0..m {
                for j in 0..m {
                    assert!((pe_sq[[i, j]] - pe[[i, j]]).abs() < 1e-9);
                }
            }
            let prod = pm.pi_g.dot(&pe).dot(&pm.pi_g);
            for i in 0..m {
                for j in 0..m {
                    assert!(
                        (prod[[i, j]] - pm.pi_g[[i, j]]).abs() < 1e-9,
                        "range containment failed at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn operator_product_concentrates() {
        let g = gen::random_connected_graph(14, 30, (0.5, 5.0), 33);
        let t = crate::tree::build_tree(&g, crate::tree::TreeStrategy::LowStretch, 3).unwrap();
        let s = crate::tree::compute_stretch(&g, &t);
        let passes = operator_approx_pass_count(&g, &t, &s, 0.1, 0.25, 20, 9).unwrap();
        assert!(passes >= 14, "only {passes}/20 trials within eps");
    }

    #[test]
    fn oracle_flow_satisfies_kirchhoff_potential_law() {
        // f* has zero potential drop around every tree cycle.
        for seed in 0..5u64 {
            let g = gen::random_connected_graph(14, 30, (0.5, 8.0), 100 + seed);
            let chi = gen::random_balanced_demand(14, 200 + seed);
            let res = dense_oracle(&g, &chi, DEFAULT_ORACLE_CAP).unwrap();
            let tree = crate::tree::build_tree(&g, crate::tree::TreeStrategy::MinResistance, 0).unwrap();
            let flow_norm = res.energy.sqrt();
            for &eid in tree.off_tree_edges() {
                let c = tree.cycle_vector(&g, eid as usize);
                let drop: f64 = g
                    .edges()
                    .iter()
                    .zip(res.flow.as_slice().iter().zip(&c))
                    .map(|(e, (&fe, &ce))| e.resistance * fe * ce)
                    .sum();
                let c_norm: f64 = g
                    .edges()
                    .iter()
                    .zip(&c)
                    .map(|(e, &ce)| e.resistance * ce * ce)
                    .sum::<f64>()
                    .sqrt();
                assert!(
                    drop.abs() <= 1e-8 * flow_norm * c_norm,
                    "KPL violated: drop={drop} seed={seed}"
                );
            }
        }
    }
}
