//! Python module exposing the graph type, the electrical-flow solvers, the
//! SDD reduction, spanning-tree statistics and the dense oracle.
//!
//! Build with `cargo build -p eflow-py --release` and import the produced
//! `libeflow_py.so` as `eflow_py` (see `python/smoke_test.py`).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use eflow::graph::{build_graph, DemandVector, FlowVector, VoltageVector, WeightedGraph};
use eflow::oracle::{dense_oracle, DEFAULT_ORACLE_CAP};
use eflow::sdd::SddSystem;
use eflow::solver::{solve, SolveReport, SolverOptions, SolverVariant};
use eflow::tree::{build_tree_rooted, compute_stretch, TreeStrategy};

fn to_py_err(e: eflow::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_variant(name: &str) -> PyResult<SolverVariant> {
    match name {
        "simple" => Ok(SolverVariant::Simple),
        "example" => Ok(SolverVariant::Example),
        "full" => Ok(SolverVariant::Full),
        other => Err(PyValueError::new_err(format!(
            "unknown solver variant `{other}` (use simple, example or full)"
        ))),
    }
}

fn parse_strategy(name: &str) -> PyResult<TreeStrategy> {
    match name {
        "lowstretch" => Ok(TreeStrategy::LowStretch),
        "mst" => Ok(TreeStrategy::MinResistance),
        other => Err(PyValueError::new_err(format!(
            "unknown tree strategy `{other}` (use lowstretch or mst)"
        ))),
    }
}

/// Weighted undirected graph with positive edge resistances.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: WeightedGraph,
}

#[pymethods]
impl PyGraph {
    /// Graph(n, edges) with edges as (a, b, resistance) triples; parallel
    /// edges merge by conductance, self-loops are rejected.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(PyGraph { inner: build_graph(n, &edges).map_err(to_py_err)? })
    }

    /// Parse the edge-list or Matrix Market Laplacian text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: eflow::io::parse_graph_text(text).map_err(to_py_err)? })
    }

    /// Edges as (tail, head, resistance) triples in id order.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (e.tail as usize, e.head as usize, e.resistance))
            .collect()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.edge_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn connected_components(&self) -> Vec<usize> {
        self.inner.connected_components()
    }

    /// L x for a vertex vector x.
    fn apply_laplacian(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .apply_laplacian(&VoltageVector(x))
            .map_err(to_py_err)?
            .0)
    }

    /// B^T f: net flow out of each vertex.
    fn divergence(&self, flow: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.divergence(&FlowVector(flow)).map_err(to_py_err)?.0)
    }

    /// sum r_e f(e)^2.
    fn energy(&self, flow: Vec<f64>) -> PyResult<f64> {
        self.inner.energy(&FlowVector(flow)).map_err(to_py_err)
    }

    /// Serialize to the edge-list text format.
    fn emit(&self) -> String {
        eflow::io::emit_graph(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.vertex_count(), self.inner.edge_count())
    }
}

/// Outcome of a solve.
#[pyclass(name = "SolveResult", frozen)]
struct PySolveResult {
    #[pyo3(get)]
    flow: Vec<f64>,
    #[pyo3(get)]
    voltages: Vec<f64>,
    #[pyo3(get)]
    energy: f64,
    #[pyo3(get)]
    dual_energy: f64,
    #[pyo3(get)]
    gap: f64,
    #[pyo3(get)]
    iterations: u64,
    #[pyo3(get)]
    effective_iterations: u64,
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    total_stretch: f64,
    #[pyo3(get)]
    tau: f64,
    #[pyo3(get)]
    residual_inf: f64,
    #[pyo3(get)]
    wall_time_ms: f64,
}

impl From<SolveReport> for PySolveResult {
    fn from(r: SolveReport) -> Self {
        PySolveResult {
            flow: r.flow.0,
            voltages: r.voltages.0,
            energy: r.energy,
            dual_energy: r.dual_energy,
            gap: r.gap,
            iterations: r.iterations,
            effective_iterations: r.effective_iterations,
            seed: r.seed,
            total_stretch: r.total_stretch,
            tau: r.tau,
            residual_inf: r.residual_inf,
            wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
        }
    }
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(energy={}, gap={:.3e}, iterations={})",
            self.energy, self.gap, self.iterations
        )
    }
}

/// Solve the Laplacian system / electrical-flow problem for a demand chi.
#[pyfunction]
#[pyo3(signature = (graph, chi, eps=1e-4, seed=0, variant="full", tree="lowstretch", root=0, max_iterations=None))]
#[allow(clippy::too_many_arguments)]
fn solve_lap(
    graph: &PyGraph,
    chi: Vec<f64>,
    eps: f64,
    seed: u64,
    variant: &str,
    tree: &str,
    root: usize,
    max_iterations: Option<u64>,
) -> PyResult<PySolveResult> {
    let options = SolverOptions {
        eps,
        seed,
        variant: parse_variant(variant)?,
        tree: parse_strategy(tree)?,
        root,
        max_iterations,
        feasibility_tol: None,
        early_exit: false,
    };
    let report = solve(&graph.inner, &DemandVector(chi), &options).map_err(to_py_err)?;
    Ok(report.into())
}

/// Solve a symmetric diagonally dominant system A x = b; entries are
/// (i, j, value) triples covering all nonzeros (both triangles).
#[pyfunction]
#[pyo3(signature = (n, entries, b, eps=1e-4, seed=0, variant="full"))]
fn solve_sdd(
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
    eps: f64,
    seed: u64,
    variant: &str,
) -> PyResult<Vec<f64>> {
    let a = SddSystem::from_entries(n, &entries).map_err(to_py_err)?;
    let options = SolverOptions {
        eps,
        seed,
        variant: parse_variant(variant)?,
        ..SolverOptions::new(eps)
    };
    eflow::sdd::solve_sdd(&a, &b, &options).map_err(to_py_err)
}

/// Spanning-tree statistics: tau, total stretch, off-tree edge ids and the
/// sampling probabilities.
#[pyfunction]
#[pyo3(signature = (graph, strategy="lowstretch", seed=0, root=0))]
fn tree_stats<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    strategy: &str,
    seed: u64,
    root: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let t = build_tree_rooted(&graph.inner, parse_strategy(strategy)?, seed, root)
        .map_err(to_py_err)?;
    let s = compute_stretch(&graph.inner, &t);
    let out = PyDict::new(py);
    out.set_item("tau", s.tau)?;
    out.set_item("total_stretch", s.total_stretch)?;
    out.set_item("off_tree", s.off_tree.clone())?;
    out.set_item("probabilities", s.probabilities.clone())?;
    out.set_item("stretch", s.stretch.clone())?;
    Ok(out)
}

/// Dense eigendecomposition reference: returns (flow, voltages, energy).
/// Intended for desk-scale verification, capped at `cap` vertices.
#[pyfunction]
#[pyo3(signature = (graph, chi, cap=DEFAULT_ORACLE_CAP))]
fn oracle_solve(graph: &PyGraph, chi: Vec<f64>, cap: usize) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let res = dense_oracle(&graph.inner, &DemandVector(chi), cap)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((res.flow.0, res.voltages.0, res.energy))
}

#[pymodule]
fn eflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve_lap, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sdd, m)?)?;
    m.add_function(wrap_pyfunction!(tree_stats, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_solve, m)?)?;
    Ok(())
}
