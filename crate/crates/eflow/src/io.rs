//! Text formats: edge-list graphs, Matrix Market input, per-line vectors
//! and the machine-readable solve report.
//!
//! Edge-list format:
//!
//! ```text
//! # comment
//! p graph <n> <m>
//! <a> <b> <resistance>     (m lines, 0-based vertex ids)
//! ```
//!
//! Matrix Market `coordinate real symmetric` input is accepted for
//! Laplacians (off-diagonals negate into conductances, a diagonal
//! consistency check applies) and for general SDD matrices.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{build_graph, WeightedGraph};
use crate::sdd::SddSystem;
use crate::solver::SolveReport;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError { line, message: message.into() }
}

/// Numbered, non-comment, non-empty lines.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses either the edge-list format or a Matrix Market Laplacian.
pub fn parse_graph_text(text: &str) -> Result<WeightedGraph> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        return parse_matrix_market_laplacian(text);
    }
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or_else(|| parse_err(0, "empty graph file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "graph" {
        return Err(parse_err(header_no, "expected header `p graph <n> <m>`"));
    }
    let n: usize = fields[2].parse().map_err(|_| parse_err(header_no, "bad vertex count"))?;
    let m: usize = fields[3].parse().map_err(|_| parse_err(header_no, "bad edge count"))?;
    let mut edges = Vec::with_capacity(m);
    for (line_no, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line_no, "expected `<a> <b> <resistance>`"));
        }
        let a: usize = f[0].parse().map_err(|_| parse_err(line_no, "bad vertex id"))?;
        let b: usize = f[1].parse().map_err(|_| parse_err(line_no, "bad vertex id"))?;
        let r: f64 = f[2].parse().map_err(|_| parse_err(line_no, "bad resistance"))?;
        if a == b {
            return Err(parse_err(line_no, format!("self-loop at vertex {a}")));
        }
        edges.push((a, b, r));
    }
    if edges.len() != m {
        return Err(parse_err(0, format!("header said {m} edges, found {}", edges.len())));
    }
    build_graph(n, &edges)
}

/// Emits the edge-list form; floats print in shortest round-trip form so
/// `parse(emit(g)) == g` exactly.
pub fn emit_graph(g: &WeightedGraph) -> String {
    let mut out = format!("p graph {} {}\n", g.vertex_count(), g.edge_count());
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.tail, e.head, e.resistance));
    }
    out
}

struct MatrixMarketHeader {
    symmetric: bool,
    n: usize,
    entries: usize,
}

fn parse_mm_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    text: &str,
) -> Result<MatrixMarketHeader> {
    let first = text.lines().next().unwrap_or_default();
    let tokens: Vec<String> = first.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() < 5
        || tokens[1] != "matrix"
        || tokens[2] != "coordinate"
        || tokens[3] != "real"
    {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix coordinate real <symmetry>`"));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };
    let (size_no, size_line) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing Matrix Market size line"))?;
    let f: Vec<&str> = size_line.split_whitespace().collect();
    if f.len() != 3 {
        return Err(parse_err(size_no, "expected `<rows> <cols> <entries>`"));
    }
    let rows: usize = f[0].parse().map_err(|_| parse_err(size_no, "bad row count"))?;
    let cols: usize = f[1].parse().map_err(|_| parse_err(size_no, "bad column count"))?;
    let entries: usize = f[2].parse().map_err(|_| parse_err(size_no, "bad entry count"))?;
    if rows != cols {
        return Err(parse_err(size_no, "matrix must be square"));
    }
    Ok(MatrixMarketHeader { symmetric, n: rows, entries })
}

type MmEntries = Vec<(usize, usize, f64)>;

fn parse_mm_entries(text: &str) -> Result<(MatrixMarketHeader, MmEntries)> {
    // Matrix Market uses % comments.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(i, l)| *i > 1 && !l.is_empty() && !l.starts_with('%'));
    let header = parse_mm_header(&mut lines, text)?;
    let mut entries = Vec::with_capacity(header.entries);
    for (line_no, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(line_no, "expected `<i> <j> <value>`"));
        }
        let i: usize = f[0].parse().map_err(|_| parse_err(line_no, "bad row index"))?;
        let j: usize = f[1].parse().map_err(|_| parse_err(line_no, "bad column index"))?;
        let v: f64 = f[2].parse().map_err(|_| parse_err(line_no, "bad value"))?;
        if i == 0 || j == 0 || i > header.n || j > header.n {
            return Err(parse_err(line_no, "index out of range (1-based)"));
        }
        entries.push((i - 1, j - 1, v));
    }
    if entries.len() != header.entries {
        return Err(parse_err(
            0,
            format!("size line said {} entries, found {}", header.entries, entries.len()),
        ));
    }
    Ok((header, entries))
}

/// Matrix Market input interpreted as a graph Laplacian: off-diagonals are
/// negated conductances and the diagonal must match their row sums.
/// Symmetric storage only (one triangle).
pub fn parse_matrix_market_laplacian(text: &str) -> Result<WeightedGraph> {
    let (header, entries) = parse_mm_entries(text)?;
    if !header.symmetric {
        return Err(Error::InconsistentLaplacian {
            reason: "Laplacian input requires symmetric storage".into(),
        });
    }
    let n = header.n;
    let mut diag = vec![0.0; n];
    let mut diag_seen = vec![false; n];
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (i, j, v) in entries {
        if i == j {
            diag[i] = v;
            diag_seen[i] = true;
            continue;
        }
        if v > 0.0 {
            return Err(Error::InconsistentLaplacian {
                reason: format!("positive off-diagonal at ({}, {})", i + 1, j + 1),
            });
        }
        if v != 0.0 {
            edges.push((i, j, 1.0 / (-v)));
        }
    }
    let g = build_graph(n, &edges)?;
    // Row-sum consistency: diagonal equals total incident conductance.
    let mut w_sum = vec![0.0; n];
    for e in g.edges() {
        w_sum[e.tail as usize] += e.conductance();
        w_sum[e.head as usize] += e.conductance();
    }
    for i in 0..n {
        let expect = w_sum[i];
        let got = if diag_seen[i] { diag[i] } else { 0.0 };
        if (got - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
            return Err(Error::InconsistentLaplacian {
                reason: format!("diagonal {} at row {} does not match conductance sum {}", got, i + 1, expect),
            });
        }
    }
    Ok(g)
}

/// Matrix Market input as a general SDD matrix.
pub fn parse_matrix_market_sdd(text: &str) -> Result<SddSystem> {
    let (header, entries) = parse_mm_entries(text)?;
    if header.symmetric {
        SddSystem::from_triangle(header.n, &entries)
    } else {
        SddSystem::from_entries(header.n, &entries)
    }
}

/// One decimal per line, exactly `n` values.
pub fn parse_vector_text(text: &str, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for (line_no, line) in content_lines(text) {
        let v: f64 = line.parse().map_err(|_| parse_err(line_no, "bad number"))?;
        out.push(v);
    }
    if out.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: out.len() });
    }
    Ok(out)
}

/// As [`parse_vector_text`], additionally requiring the entries to sum to
/// zero (a demand vector).
pub fn parse_demand_text(text: &str, n: usize) -> Result<Vec<f64>> {
    let v = parse_vector_text(text, n)?;
    let sum: f64 = v.iter().sum();
    let scale: f64 = v.iter().map(|x| x.abs()).sum();
    if sum.abs() > 1e-9 * (1.0 + scale) {
        return Err(Error::DemandNotBalanced { sum });
    }
    Ok(v)
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph_text(&std::fs::read_to_string(path)?)
}

pub fn read_vector(path: &Path, n: usize) -> Result<Vec<f64>> {
    parse_vector_text(&std::fs::read_to_string(path)?, n)
}

pub fn read_demand(path: &Path, n: usize) -> Result<Vec<f64>> {
    parse_demand_text(&std::fs::read_to_string(path)?, n)
}

pub const REPORT_SCHEMA: &str = "eflow.report.v1";

/// Line-delimited `key value` report. Keys appear in a fixed order and
/// floats print in shortest round-trip form, so reruns with identical
/// inputs produce byte-identical output apart from the wall-time line.
pub fn structured_report(report: &SolveReport, variant: &str, n: usize, m: usize, eps: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!("schema {REPORT_SCHEMA}\n"));
    out.push_str(&format!("variant {variant}\n"));
    out.push_str(&format!("n {n}\n"));
    out.push_str(&format!("m {m}\n"));
    out.push_str(&format!("eps {eps}\n"));
    out.push_str(&format!("seed {}\n", report.seed));
    out.push_str(&format!("iterations {}\n", report.iterations));
    out.push_str(&format!("effective_iterations {}\n", report.effective_iterations));
    out.push_str(&format!("energy {}\n", report.energy));
    out.push_str(&format!("dual_energy {}\n", report.dual_energy));
    out.push_str(&format!("gap {}\n", report.gap));
    out.push_str(&format!("residual_inf {}\n", report.residual_inf));
    out.push_str(&format!("total_stretch {}\n", report.total_stretch));
    out.push_str(&format!("tau {}\n", report.tau));
    out.push_str(&format!("wall_time_ms {}\n", report.wall_time.as_secs_f64() * 1e3));
    out
}

/// Human-readable report.
pub fn text_report(report: &SolveReport, variant: &str, n: usize, m: usize, eps: f64) -> String {
    format!(
        "solver          {variant}\n\
         graph           n = {n}, m = {m}\n\
         eps             {eps}\n\
         seed            {}\n\
         iterations      {} ({} effective)\n\
         energy          {:.12e}\n\
         dual energy     {:.12e}\n\
         duality gap     {:.3e}\n\
         residual (inf)  {:.3e}\n\
         tree stretch    {:.6e}\n\
         tau             {:.6e}\n\
         wall time       {:.3} ms\n",
        report.seed,
        report.iterations,
        report.effective_iterations,
        report.energy,
        report.dual_energy,
        report.gap,
        report.residual_inf,
        report.total_stretch,
        report.tau,
        report.wall_time.as_secs_f64() * 1e3,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    const K3_FILE: &str = "# triangle\np graph 3 3\n0 1 1.0\n1 2 1.0\n0 2 1.0\n";

    #[test]
    fn parse_edge_list() {
        let g = parse_graph_text(K3_FILE).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let bad = "p graph 2 1\n0 0 1.0\n";
        match parse_graph_text(bad) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let short = "p graph 2 2\n0 1 1.0\n";
        assert!(matches!(parse_graph_text(short), Err(Error::ParseError { .. })));
    }

    #[test]
    fn emit_parse_round_trip_is_exact() {
        for seed in 0..5u64 {
            let g = gen::random_connected_graph(20, 50, (0.001, 1234.5), seed);
            let back = parse_graph_text(&emit_graph(&g)).unwrap();
            assert_eq!(back.vertex_count(), g.vertex_count());
            assert_eq!(back.edge_count(), g.edge_count());
            for (a, b) in g.edges().iter().zip(back.edges()) {
                assert_eq!(a.tail, b.tail);
                assert_eq!(a.head, b.head);
                assert_eq!(a.resistance.to_bits(), b.resistance.to_bits());
            }
        }
    }

    #[test]
    fn matrix_market_laplacian_matches_edge_list() {
        let mm = "%%MatrixMarket matrix coordinate real symmetric\n\
                  3 3 6\n\
                  1 1 2.0\n\
                  2 2 2.0\n\
                  3 3 2.0\n\
                  2 1 -1.0\n\
                  3 1 -1.0\n\
                  3 2 -1.0\n";
        let g = parse_graph_text(mm).unwrap();
        let direct = parse_graph_text(K3_FILE).unwrap();
        assert_eq!(g.edge_count(), direct.edge_count());
        let key = |g: &crate::graph::WeightedGraph| {
            let mut v: Vec<(u32, u32, u64)> =
                g.edges().iter().map(|e| (e.tail, e.head, e.resistance.to_bits())).collect();
            v.sort();
            v
        };
        assert_eq!(key(&g), key(&direct));
    }

    #[test]
    fn matrix_market_rejects_inconsistent_diagonal() {
        let mm = "%%MatrixMarket matrix coordinate real symmetric\n\
                  2 2 3\n\
                  1 1 5.0\n\
                  2 2 1.0\n\
                  2 1 -1.0\n";
        assert!(matches!(
            parse_graph_text(mm),
            Err(Error::InconsistentLaplacian { .. })
        ));
    }

    #[test]
    fn matrix_market_sdd_parses_positive_offdiagonals() {
        let mm = "%%MatrixMarket matrix coordinate real symmetric\n\
                  2 2 3\n\
                  1 1 2.0\n\
                  2 2 3.0\n\
                  2 1 1.0\n";
        let a = parse_matrix_market_sdd(mm).unwrap();
        assert_eq!(a.dimension(), 2);
        assert!(a.validate().is_ok());
        let dense = a.to_dense();
        assert_eq!(dense[[0, 1]], 1.0);
    }

    #[test]
    fn vector_parsing() {
        let v = parse_vector_text("1.0\n0.0\n-1.0\n", 3).unwrap();
        assert_eq!(v, vec![1.0, 0.0, -1.0]);
        assert!(matches!(
            parse_vector_text("1.0\n2.0\n", 3),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            parse_demand_text("1.0\n0.0\n0.0\n", 3),
            Err(Error::DemandNotBalanced { .. })
        ));
        assert!(parse_demand_text("1.0\n0.0\n-1.0\n", 3).is_ok());
    }

    #[test]
    fn structured_report_is_stable_apart_from_wall_time() {
        let g = gen::cycle_graph(4);
        let chi = crate::graph::DemandVector(vec![1.0, 0.0, -1.0, 0.0]);
        let opts = crate::solver::SolverOptions { seed: 9, ..crate::solver::SolverOptions::new(0.01) };
        let a = crate::solver::solve(&g, &chi, &opts).unwrap();
        let b = crate::solver::solve(&g, &chi, &opts).unwrap();
        let strip = |s: String| -> String {
            s.lines().filter(|l| !l.starts_with("wall_time_ms")).collect::<Vec<_>>().join("\n")
        };
        assert_eq!(
            strip(structured_report(&a, "simple", 4, 4, 0.01)),
            strip(structured_report(&b, "simple", 4, 4, 0.01))
        );
    }
}
