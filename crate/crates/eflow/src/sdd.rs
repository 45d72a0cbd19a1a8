//! Reduction from symmetric diagonally dominant systems to connected
//! Laplacian solves.
//!
//! An SDD matrix splits as `A = D1 + Ap + An + D2` where `Ap`/`An` hold the
//! positive/negative off-diagonals, `D1` is the diagonal of off-diagonal
//! absolute row sums and `D2 >= 0` the excess diagonal. The doubled matrix
//!
//! ```text
//! A~ = [ D1 + D2/2 + An    -D2/2 - Ap    ]
//!      [ -D2/2 - Ap        D1 + D2/2 + An ]
//! ```
//!
//! is a Laplacian on `2n` vertices; solving `A~ (x1, x2) = (b, -b)` and
//! recovering `x = (x1 - x2)/2` solves the original system, and an
//! eps-approximate solution carries over with the same eps in the A-norm.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{build_graph, DemandVector, WeightedGraph};
use crate::solver::{solve, SolverOptions};

/// Sparse symmetric SDD matrix.
#[derive(Debug, Clone)]
pub struct SddSystem {
    n: usize,
    diag: Vec<f64>,
    /// Off-diagonal entries with `i < j`, merged per pair.
    off: Vec<(u32, u32, f64)>,
}

/// The four-part split of an SDD matrix.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Off-diagonal absolute row sums.
    pub d1: Vec<f64>,
    /// Excess diagonal, entrywise nonnegative.
    pub d2: Vec<f64>,
    /// Positive off-diagonals, `i < j`.
    pub ap: Vec<(u32, u32, f64)>,
    /// Negative off-diagonals, `i < j`.
    pub an: Vec<(u32, u32, f64)>,
}

impl SddSystem {
    /// Builds the matrix from `(i, j, value)` triples. Duplicate positions
    /// are summed; `(i, j)` and `(j, i)` must agree exactly.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<SddSystem> {
        let mut map: std::collections::BTreeMap<(u32, u32), f64> = std::collections::BTreeMap::new();
        for &(i, j, v) in entries {
            if i >= n {
                return Err(Error::VertexOutOfRange { vertex: i, n });
            }
            if j >= n {
                return Err(Error::VertexOutOfRange { vertex: j, n });
            }
            *map.entry((i as u32, j as u32)).or_insert(0.0) += v;
        }
        let mut diag = vec![0.0; n];
        let mut off: Vec<(u32, u32, f64)> = Vec::new();
        for (&(i, j), &v) in &map {
            if i == j {
                diag[i as usize] = v;
                continue;
            }
            if i < j {
                let mirror = map.get(&(j, i)).copied();
                match mirror {
                    Some(w) => {
                        if v != w {
                            return Err(Error::NotSymmetric {
                                i: i as usize,
                                j: j as usize,
                                a: v,
                                b: w,
                            });
                        }
                    }
                    None => {
                        if v != 0.0 {
                            return Err(Error::NotSymmetric {
                                i: i as usize,
                                j: j as usize,
                                a: v,
                                b: 0.0,
                            });
                        }
                    }
                }
                if v != 0.0 {
                    off.push((i, j, v));
                }
            } else if !map.contains_key(&(j, i)) && v != 0.0 {
                return Err(Error::NotSymmetric { i: i as usize, j: j as usize, a: v, b: 0.0 });
            }
        }
        Ok(SddSystem { n, diag, off })
    }

    /// Builds from one triangle only, mirroring entries (Matrix Market
    /// symmetric convention).
    pub fn from_triangle(n: usize, entries: &[(usize, usize, f64)]) -> Result<SddSystem> {
        let mut both: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len() * 2);
        for &(i, j, v) in entries {
            both.push((i, j, v));
            if i != j {
                both.push((j, i, v));
            }
        }
        SddSystem::from_entries(n, &both)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<SddSystem> {
        let n = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        SddSystem::from_entries(n, &entries)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            a[[i, i]] = self.diag[i];
        }
        for &(i, j, v) in &self.off {
            a[[i as usize, j as usize]] = v;
            a[[j as usize, i as usize]] = v;
        }
        a
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut out: Vec<f64> = (0..self.n).map(|i| self.diag[i] * x[i]).collect();
        for &(i, j, v) in &self.off {
            out[i as usize] += v * x[j as usize];
            out[j as usize] += v * x[i as usize];
        }
        out
    }

    /// `||x||_A = sqrt(x^T A x)`.
    pub fn a_norm(&self, x: &[f64]) -> f64 {
        let ax = self.apply(x);
        let q: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        q.max(0.0).sqrt()
    }

    /// Checks symmetry (structural, by construction) and row diagonal
    /// dominance with tolerance `1e-12` times the row scale.
    pub fn validate(&self) -> Result<()> {
        let mut off_sum = vec![0.0; self.n];
        for &(i, j, v) in &self.off {
            off_sum[i as usize] += v.abs();
            off_sum[j as usize] += v.abs();
        }
        for i in 0..self.n {
            let scale = self.diag[i].abs() + off_sum[i];
            if self.diag[i] < off_sum[i] - 1e-12 * scale {
                return Err(Error::NotDiagonallyDominant {
                    row: i,
                    diagonal: self.diag[i],
                    off_sum: off_sum[i],
                });
            }
        }
        Ok(())
    }

    /// Splits into `(D1, Ap, An, D2)`. `D1` sums absolute off-diagonals
    /// only, which is what makes `D2` nonnegative and `D1 + An - Ap` a
    /// Laplacian.
    pub fn decompose(&self) -> Result<Decomposition> {
        let mut d1 = vec![0.0; self.n];
        let mut ap = Vec::new();
        let mut an = Vec::new();
        for &(i, j, v) in &self.off {
            d1[i as usize] += v.abs();
            d1[j as usize] += v.abs();
            if v > 0.0 {
                ap.push((i, j, v));
            } else {
                an.push((i, j, v));
            }
        }
        let mut d2 = vec![0.0; self.n];
        for i in 0..self.n {
            let excess = self.diag[i] - d1[i];
            let scale = self.diag[i].abs() + d1[i];
            if excess < -1e-12 * scale {
                return Err(Error::DecompositionInvariantViolated {
                    reason: format!("row {i} has negative excess diagonal {excess}"),
                });
            }
            d2[i] = excess.max(0.0);
        }
        Ok(Decomposition { d1, d2, ap, an })
    }

    /// The doubled Laplacian as a `2n`-vertex graph. Vertex `i` of the
    /// first copy pairs with vertex `i + n`; zero-conductance edges are
    /// omitted.
    pub fn build_augmented_laplacian(&self) -> Result<WeightedGraph> {
        let d = self.decompose()?;
        let n = self.n;
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for &(i, j, v) in &d.an {
            let (i, j) = (i as usize, j as usize);
            let r = 1.0 / (-v);
            edges.push((i, j, r));
            edges.push((i + n, j + n, r));
        }
        for &(i, j, v) in &d.ap {
            let (i, j) = (i as usize, j as usize);
            let r = 1.0 / v;
            edges.push((i, j + n, r));
            edges.push((j, i + n, r));
        }
        for i in 0..n {
            if d.d2[i] > 0.0 {
                edges.push((i, i + n, 2.0 / d.d2[i]));
            }
        }
        build_graph(2 * n, &edges)
    }
}

/// Solves `A x = b` to relative accuracy eps in the A-norm (in
/// expectation) by solving the doubled Laplacian per connected component.
pub fn solve_sdd(a: &SddSystem, b: &[f64], options: &SolverOptions) -> Result<Vec<f64>> {
    if b.len() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: b.len() });
    }
    a.validate()?;
    let aug = a.build_augmented_laplacian()?;
    let labels = aug.connected_components();
    let component_count = labels.iter().copied().max().map_or(0, |c| c + 1);

    let mut demand = vec![0.0; 2 * a.n];
    for i in 0..a.n {
        demand[i] = b[i];
        demand[i + a.n] = -b[i];
    }
    let b_scale: f64 = b.iter().map(|x| x.abs()).sum();
    let tol = 1e-9 * (1.0 + b_scale);

    let mut voltages = vec![0.0; 2 * a.n];
    for comp in 0..component_count {
        let verts: Vec<usize> = (0..2 * a.n).filter(|&v| labels[v] == comp).collect();
        let sum: f64 = verts.iter().map(|&v| demand[v]).sum();
        if sum.abs() > tol {
            return Err(Error::InconsistentSystem { sum });
        }
        if verts.len() == 1 {
            continue;
        }
        // Reindex the component and solve it on its own.
        let mut local_of = vec![usize::MAX; 2 * a.n];
        for (local, &v) in verts.iter().enumerate() {
            local_of[v] = local;
        }
        let mut edges = Vec::new();
        for e in aug.edges() {
            if labels[e.tail as usize] == comp {
                edges.push((local_of[e.tail as usize], local_of[e.head as usize], e.resistance));
            }
        }
        let sub = build_graph(verts.len(), &edges)?;
        let chi = DemandVector(verts.iter().map(|&v| demand[v]).collect());
        let report = solve(&sub, &chi, options)?;
        for (local, &v) in verts.iter().enumerate() {
            voltages[v] = report.voltages[local];
        }
    }

    Ok((0..a.n).map(|i| (voltages[i] - voltages[i + a.n]) / 2.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dense_laplacian, symmetric_eigen};

    fn fixture() -> SddSystem {
        SddSystem::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap()
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert!(fixture().validate().is_ok());

        let bad = SddSystem::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(bad.validate(), Err(Error::NotDiagonallyDominant { row: 0, .. })));

        assert!(matches!(
            SddSystem::from_dense(&[vec![1.0, 0.0], vec![1.0, 1.0]]),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn decompose_fixture() {
        let d = fixture().decompose().unwrap();
        assert_eq!(d.d1, vec![1.0, 1.0]);
        assert_eq!(d.d2, vec![1.0, 2.0]);
        assert_eq!(d.ap, vec![(0, 1, 1.0)]);
        assert!(d.an.is_empty());
    }

    #[test]
    fn decompose_laplacian_and_diagonal() {
        let lap = SddSystem::from_dense(&[
            vec![2.0, -1.0, -1.0],
            vec![-1.0, 2.0, -1.0],
            vec![-1.0, -1.0, 2.0],
        ])
        .unwrap();
        let d = lap.decompose().unwrap();
        assert!(d.ap.is_empty());
        assert_eq!(d.an.len(), 3);
        assert_eq!(d.d2, vec![0.0; 3]);

        let diag = SddSystem::from_dense(&[vec![2.0]]).unwrap();
        let d = diag.decompose().unwrap();
        assert_eq!(d.d1, vec![0.0]);
        assert_eq!(d.d2, vec![2.0]);
    }

    #[test]
    fn reconstruction_is_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = 12;
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < 0.3 {
                        let v = rng.random_range(-2.0..2.0);
                        rows[i][j] = v;
                        rows[j][i] = v;
                    }
                }
            }
            for i in 0..n {
                let s: f64 = rows[i].iter().map(|x: &f64| x.abs()).sum();
                rows[i][i] = s + rng.random_range(0.0..1.0);
            }
            let a = SddSystem::from_dense(&rows).unwrap();
            let d = a.decompose().unwrap();
            // D1 + Ap + An + D2 = A entrywise.
            let mut back = vec![vec![0.0; n]; n];
            for i in 0..n {
                back[i][i] = d.d1[i] + d.d2[i];
            }
            for &(i, j, v) in d.ap.iter().chain(&d.an) {
                back[i as usize][j as usize] = v;
                back[j as usize][i as usize] = v;
            }
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(back[i][j], rows[i][j], "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn augmented_laplacian_fixture() {
        let a = fixture();
        let aug = a.build_augmented_laplacian().unwrap();
        assert_eq!(aug.vertex_count(), 4);
        let dense = dense_laplacian(&aug);
        let expect = [
            [1.5, 0.0, -0.5, -1.0],
            [0.0, 2.0, -1.0, -1.0],
            [-0.5, -1.0, 1.5, 0.0],
            [-1.0, -1.0, 0.0, 2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (dense[[i, j]] - expect[i][j]).abs() < 1e-12,
                    "({i},{j}): {} vs {}",
                    dense[[i, j]],
                    expect[i][j]
                );
            }
        }
    }

    #[test]
    fn augmented_laplacian_of_laplacian_input_is_two_copies() {
        let lap = SddSystem::from_dense(&[
            vec![2.0, -1.0, -1.0],
            vec![-1.0, 2.0, -1.0],
            vec![-1.0, -1.0, 2.0],
        ])
        .unwrap();
        let aug = lap.build_augmented_laplacian().unwrap();
        let labels = aug.connected_components();
        // Two disjoint copies of K3.
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[0], labels[2]);
        assert_eq!(labels[3], labels[4]);
        assert_ne!(labels[0], labels[3]);
    }

    #[test]
    fn augmented_laplacian_of_pure_diagonal() {
        let a = SddSystem::from_dense(&[vec![2.0]]).unwrap();
        let aug = a.build_augmented_laplacian().unwrap();
        assert_eq!(aug.vertex_count(), 2);
        assert_eq!(aug.edge_count(), 1);
        assert!((aug.edge(0).resistance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_fixture_system() {
        let a = fixture();
        let x = solve_sdd(&a, &[1.0, 0.0], &SolverOptions::new(1e-8)).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-6, "x0 = {}", x[0]);
        assert!((x[1] + 0.2).abs() < 1e-6, "x1 = {}", x[1]);
    }

    #[test]
    fn solve_diagonal_system() {
        let a = SddSystem::from_dense(&[vec![2.0]]).unwrap();
        let x = solve_sdd(&a, &[4.0], &SolverOptions::new(1e-8)).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn solve_laplacian_input_matches_pseudoinverse_in_a_norm() {
        let rows = vec![
            vec![2.0, -1.0, -1.0],
            vec![-1.0, 2.0, -1.0],
            vec![-1.0, -1.0, 2.0],
        ];
        let a = SddSystem::from_dense(&rows).unwrap();
        let b = [1.0, 0.0, -1.0];
        let eps = 1e-6;
        let x = solve_sdd(&a, &b, &SolverOptions::new(eps)).unwrap();
        let eig = symmetric_eigen(&a.to_dense());
        let x_star = eig.pseudoinverse_apply(&b, 1e-10);
        let diff: Vec<f64> = x.iter().zip(&x_star).map(|(p, q)| p - q).collect();
        let err = a.a_norm(&diff);
        let scale = a.a_norm(&x_star);
        assert!(err <= eps.sqrt() * scale * 2.0, "err {err} scale {scale}");
    }

    #[test]
    fn dense_augmented_solve_recovers_exactly() {
        // Exact-recovery identity: solve the doubled system densely and
        // check A ((x1 - x2)/2) = b.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..5 {
            let n = 8;
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < 0.4 {
                        let v = rng.random_range(-2.0..2.0);
                        rows[i][j] = v;
                        rows[j][i] = v;
                    }
                }
            }
            for i in 0..n {
                let s: f64 = rows[i].iter().map(|x: &f64| x.abs()).sum();
                rows[i][i] = s + rng.random_range(0.1..1.5);
            }
            let a = SddSystem::from_dense(&rows).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();

            let aug = a.build_augmented_laplacian().unwrap();
            let mut rhs = vec![0.0; 2 * n];
            for i in 0..n {
                rhs[i] = b[i];
                rhs[i + n] = -b[i];
            }
            let eig = symmetric_eigen(&dense_laplacian(&aug));
            let tilde_x = eig.pseudoinverse_apply(&rhs, 1e-10);
            let x: Vec<f64> = (0..n).map(|i| (tilde_x[i] - tilde_x[i + n]) / 2.0).collect();
            let ax = a.apply(&x);
            for i in 0..n {
                assert!(
                    (ax[i] - b[i]).abs() <= 1e-9 * (1.0 + b[i].abs()),
                    "trial {trial} row {i}: {} vs {}",
                    ax[i],
                    b[i]
                );
            }
        }
    }

    #[test]
    fn singular_inconsistent_rhs_rejected() {
        let rows = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let a = SddSystem::from_dense(&rows).unwrap();
        // b not orthogonal to the null space (all-ones) of this component.
        assert!(matches!(
            solve_sdd(&a, &[1.0, 0.0], &SolverOptions::new(1e-4)),
            Err(Error::InconsistentSystem { .. })
        ));
    }

    #[test]
    fn zero_row_requires_zero_rhs() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 2.0]];
        let a = SddSystem::from_dense(&rows).unwrap();
        assert!(matches!(
            solve_sdd(&a, &[1.0, 0.0], &SolverOptions::new(1e-4)),
            Err(Error::InconsistentSystem { .. })
        ));
        let x = solve_sdd(&a, &[0.0, 3.0], &SolverOptions::new(1e-8)).unwrap();
        assert!(x[0].abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-8);
    }
}
