//! Command-line front end: electrical flows, Laplacian and SDD solves,
//! spanning-tree statistics and oracle-backed verification.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eflow::graph::DemandVector;
use eflow::io;
use eflow::oracle::{self, DEFAULT_ORACLE_CAP};
use eflow::sdd;
use eflow::solver::{self, SolverOptions, SolverVariant};
use eflow::tree::{self, TreeStrategy};

#[derive(Parser)]
#[command(
    name = "eflow",
    about = "Electrical-flow solver for graph Laplacian and SDD linear systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an eps-approximate electrical flow for a demand vector.
    Flow(SolveArgs),
    /// Solve the Laplacian system L v = chi and report voltages.
    SolveLap(SolveArgs),
    /// Solve a symmetric diagonally dominant system A x = b.
    SolveSdd(SddArgs),
    /// Build a spanning tree and report stretch statistics.
    TreeStats(TreeStatsArgs),
    /// Run the oracle-backed verification harness on an instance.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Simple,
    Example,
    Full,
}

impl From<SolverChoice> for SolverVariant {
    fn from(c: SolverChoice) -> SolverVariant {
        match c {
            SolverChoice::Simple => SolverVariant::Simple,
            SolverChoice::Example => SolverVariant::Example,
            SolverChoice::Full => SolverVariant::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Structured,
}

#[derive(Args)]
struct CommonSolveArgs {
    /// Target approximation quality (expected energy within (1+eps) of optimal).
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// RNG seed; identical inputs and seed reproduce identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SolverChoice::Full)]
    solver: SolverChoice,
    /// Spanning tree strategy: `lowstretch`, `mst`, or `file:<path>` with
    /// one `a b` vertex pair per line.
    #[arg(long, default_value = "lowstretch")]
    tree: String,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Compare against the dense oracle (needs n <= oracle cap); exit 2 on
    /// violation.
    #[arg(long)]
    verify: bool,
    /// Override the computed number of cycle updates.
    #[arg(long)]
    max_iter: Option<u64>,
    /// Root vertex for tree-induced voltages.
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// Dense-oracle dimension cap for --verify.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Write the solution vector (flow per edge, or voltage/x per vertex)
    /// to this path, one value per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Graph file: edge list (`p graph n m`) or Matrix Market Laplacian.
    graph: PathBuf,
    /// Demand vector chi, one value per line, summing to zero.
    demand: PathBuf,
    #[command(flatten)]
    common: CommonSolveArgs,
}

#[derive(Args)]
struct SddArgs {
    /// SDD matrix in Matrix Market coordinate format.
    matrix: PathBuf,
    /// Right-hand side b, one value per line.
    rhs: PathBuf,
    #[command(flatten)]
    common: CommonSolveArgs,
}

#[derive(Args)]
struct TreeStatsArgs {
    graph: PathBuf,
    #[arg(long, default_value = "lowstretch")]
    tree: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// Also print the tree in exchange format (`parent edge_sign` per vertex).
    #[arg(long)]
    dump_tree: bool,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    /// Demand vector; a seeded balanced demand is generated when omitted.
    #[arg(long)]
    demand: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Seeded trials for the projection-product operator check (only run
    /// when n <= 30).
    #[arg(long, default_value_t = 100)]
    operator_trials: usize,
}

enum TreeSpec {
    LowStretch,
    Mst,
    File(String),
}

fn parse_tree_spec(spec: &str) -> Result<TreeSpec, String> {
    match spec {
        "lowstretch" => Ok(TreeSpec::LowStretch),
        "mst" => Ok(TreeSpec::Mst),
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                Ok(TreeSpec::File(
                    std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
                ))
            } else {
                Err(format!("unknown tree strategy `{other}` (use lowstretch, mst, or file:<path>)"))
            }
        }
    }
}

/// Resolves a tree spec against the graph; `file:` lines are `a b` vertex
/// pairs mapped to edge ids.
fn resolve_tree(spec: TreeSpec, g: &eflow::WeightedGraph) -> Result<TreeStrategy, String> {
    match spec {
        TreeSpec::LowStretch => Ok(TreeStrategy::LowStretch),
        TreeSpec::Mst => Ok(TreeStrategy::MinResistance),
        TreeSpec::File(text) => {
            let mut ids = Vec::new();
            for (no, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(format!("tree file line {}: expected `a b`", no + 1));
                }
                let a: usize = f[0].parse().map_err(|_| format!("tree file line {}", no + 1))?;
                let b: usize = f[1].parse().map_err(|_| format!("tree file line {}", no + 1))?;
                let eid = g
                    .edges()
                    .iter()
                    .position(|e| {
                        (e.tail as usize, e.head as usize) == (a.min(b), a.max(b))
                    })
                    .ok_or(format!("tree file line {}: no edge ({a}, {b})", no + 1))?;
                ids.push(eid);
            }
            Ok(TreeStrategy::Given(ids))
        }
    }
}

fn write_values(path: &PathBuf, values: &[f64]) -> std::io::Result<()> {
    let mut out = String::with_capacity(values.len() * 16);
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, out)
}

fn options_from(common: &CommonSolveArgs, tree: TreeStrategy) -> SolverOptions {
    SolverOptions {
        eps: common.eps,
        seed: common.seed,
        variant: common.solver.into(),
        tree,
        root: common.root,
        max_iterations: common.max_iter,
        feasibility_tol: None,
        early_exit: false,
    }
}

fn variant_name(c: SolverChoice) -> &'static str {
    match c {
        SolverChoice::Simple => "simple",
        SolverChoice::Example => "example",
        SolverChoice::Full => "full",
    }
}

fn run_solve(args: &SolveArgs, want_voltages: bool) -> Result<i32, String> {
    if !(args.common.eps.is_finite() && args.common.eps > 0.0) {
        return Err("--eps must be positive and finite".into());
    }
    let g = io::read_graph(&args.graph).map_err(|e| e.to_string())?;
    let chi = DemandVector(
        io::read_demand(&args.demand, g.vertex_count()).map_err(|e| e.to_string())?,
    );
    let strategy = resolve_tree(parse_tree_spec(&args.common.tree)?, &g)?;
    let options = options_from(&args.common, strategy);
    let report = solver::solve(&g, &chi, &options).map_err(|e| e.to_string())?;

    let name = variant_name(args.common.solver);
    let (n, m) = (g.vertex_count(), g.edge_count());
    match args.common.report {
        ReportFormat::Text => print!("{}", io::text_report(&report, name, n, m, args.common.eps)),
        ReportFormat::Structured => {
            print!("{}", io::structured_report(&report, name, n, m, args.common.eps))
        }
    }
    if let Some(path) = &args.common.out {
        let values = if want_voltages { report.voltages.as_slice() } else { report.flow.as_slice() };
        write_values(path, values).map_err(|e| e.to_string())?;
    }

    if args.common.verify {
        let oracle = oracle::dense_oracle(&g, &chi, args.common.oracle_cap)
            .map_err(|e| e.to_string())?;
        let energy_ok = report.energy <= (1.0 + args.common.eps) * oracle.energy + 1e-12;
        let v_err = oracle::laplacian_norm_of_difference(
            &g,
            report.voltages.as_slice(),
            oracle.voltages.as_slice(),
        );
        let v_scale = oracle::laplacian_norm_of_difference(
            &g,
            oracle.voltages.as_slice(),
            &vec![0.0; g.vertex_count()],
        );
        let v_ok = v_err <= args.common.eps.sqrt() * v_scale + 1e-12;
        println!(
            "verify energy {} ({} vs (1+eps)*{})",
            if energy_ok { "PASS" } else { "FAIL" },
            report.energy,
            oracle.energy
        );
        println!(
            "verify voltages {} (|v - v*|_L = {v_err:.3e}, sqrt(eps)*|v*|_L = {:.3e})",
            if v_ok { "PASS" } else { "FAIL" },
            args.common.eps.sqrt() * v_scale
        );
        if !(energy_ok && (!want_voltages || v_ok)) {
            return Ok(2);
        }
    }
    Ok(0)
}

fn run_solve_sdd(args: &SddArgs) -> Result<i32, String> {
    if !(args.common.eps.is_finite() && args.common.eps > 0.0) {
        return Err("--eps must be positive and finite".into());
    }
    let text = std::fs::read_to_string(&args.matrix).map_err(|e| e.to_string())?;
    let a = io::parse_matrix_market_sdd(&text).map_err(|e| e.to_string())?;
    let b = io::read_vector(&args.rhs, a.dimension()).map_err(|e| e.to_string())?;
    // Component subgraphs get their own edge ids, so a file: tree spec
    // cannot apply here.
    let strategy = match parse_tree_spec(&args.common.tree)? {
        TreeSpec::LowStretch => TreeStrategy::LowStretch,
        TreeSpec::Mst => TreeStrategy::MinResistance,
        TreeSpec::File(_) => return Err("solve-sdd does not accept a file: tree".into()),
    };
    let options = options_from(&args.common, strategy);
    let x = sdd::solve_sdd(&a, &b, &options).map_err(|e| e.to_string())?;

    let residual: Vec<f64> = a.apply(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
    let res_inf = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("n {}", a.dimension());
    println!("eps {}", args.common.eps);
    println!("seed {}", args.common.seed);
    println!("residual_inf {res_inf:e}");
    if let Some(path) = &args.common.out {
        write_values(path, &x).map_err(|e| e.to_string())?;
    } else {
        for v in &x {
            println!("x {v}");
        }
    }

    if args.common.verify {
        if a.dimension() > args.common.oracle_cap {
            return Err(format!("--verify needs n <= {}", args.common.oracle_cap));
        }
        let eig = oracle::symmetric_eigen(&a.to_dense());
        let x_star = eig.pseudoinverse_apply(&b, 1e-10);
        let diff: Vec<f64> = x.iter().zip(&x_star).map(|(p, q)| p - q).collect();
        let err = a.a_norm(&diff);
        let scale = a.a_norm(&x_star);
        // The voltage-side guarantee carries a sqrt(eps) factor into the
        // A-norm of the recovered solution.
        let ok = err <= args.common.eps.sqrt() * scale + 1e-12;
        println!(
            "verify a-norm {} (|x - x*|_A = {err:.3e}, sqrt(eps)*|x*|_A = {:.3e})",
            if ok { "PASS" } else { "FAIL" },
            args.common.eps.sqrt() * scale
        );
        if !ok {
            return Ok(2);
        }
    }
    Ok(0)
}

fn run_tree_stats(args: &TreeStatsArgs) -> Result<i32, String> {
    let g = io::read_graph(&args.graph).map_err(|e| e.to_string())?;
    let strategy = resolve_tree(parse_tree_spec(&args.tree)?, &g)?;
    let t = tree::build_tree_rooted(&g, strategy, args.seed, args.root)
        .map_err(|e| e.to_string())?;
    let s = tree::compute_stretch(&g, &t);
    println!("n {}", g.vertex_count());
    println!("m {}", g.edge_count());
    println!("off_tree_edges {}", s.off_tree.len());
    println!("total_stretch {}", s.total_stretch);
    println!("tau {}", s.tau);
    if args.dump_tree {
        print!("{}", t.exchange_format());
    }
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<i32, String> {
    let g = io::read_graph(&args.graph).map_err(|e| e.to_string())?;
    let n = g.vertex_count();
    let chi = match &args.demand {
        Some(path) => DemandVector(io::read_demand(path, n).map_err(|e| e.to_string())?),
        None => eflow::gen::random_balanced_demand(n, args.seed),
    };
    let oracle_res =
        oracle::dense_oracle(&g, &chi, args.oracle_cap).map_err(|e| e.to_string())?;
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    // Oracle self-consistency: strong duality at the optimum.
    let dual_opt = g
        .dual_energy(&oracle_res.voltages, &chi)
        .map_err(|e| e.to_string())?;
    check(
        "oracle strong duality",
        (oracle_res.energy - dual_opt).abs() <= 1e-8 * (1.0 + oracle_res.energy),
        format!("energy {} dual {}", oracle_res.energy, dual_opt),
    );

    for (variant, name) in [
        (SolverVariant::Simple, "simple"),
        (SolverVariant::Example, "example"),
        (SolverVariant::Full, "full"),
    ] {
        let options = SolverOptions {
            eps: args.eps,
            seed: args.seed,
            variant,
            ..SolverOptions::new(args.eps)
        };
        let report = solver::solve(&g, &chi, &options).map_err(|e| e.to_string())?;
        check(
            &format!("{name} feasibility"),
            report.residual_inf <= 1e-8 * (1.0 + chi.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()))),
            format!("residual {:.3e}", report.residual_inf),
        );
        check(
            &format!("{name} energy"),
            report.energy <= (1.0 + args.eps) * oracle_res.energy + 1e-12,
            format!("{} vs (1+eps)*{}", report.energy, oracle_res.energy),
        );
        let v_err = oracle::laplacian_norm_of_difference(
            &g,
            report.voltages.as_slice(),
            oracle_res.voltages.as_slice(),
        );
        let v_scale =
            oracle::laplacian_norm_of_difference(&g, oracle_res.voltages.as_slice(), &vec![0.0; n]);
        check(
            &format!("{name} voltages"),
            v_err <= args.eps.sqrt() * v_scale + 1e-12,
            format!("|v-v*|_L {v_err:.3e} bound {:.3e}", args.eps.sqrt() * v_scale),
        );
        check(
            &format!("{name} gap nonnegative"),
            report.gap >= -1e-9 * (1.0 + report.energy),
            format!("gap {:.3e}", report.gap),
        );
    }

    if n <= 30 && args.operator_trials > 0 {
        let t = tree::build_tree(&g, TreeStrategy::LowStretch, args.seed)
            .map_err(|e| e.to_string())?;
        let s = tree::compute_stretch(&g, &t);
        if !s.off_tree.is_empty() {
            let passes = oracle::operator_approx_pass_count(
                &g,
                &t,
                &s,
                0.1,
                0.25,
                args.operator_trials,
                args.seed,
            )
            .map_err(|e| e.to_string())?;
            let need = (args.operator_trials * 7) / 10;
            check(
                "projection product",
                passes >= need,
                format!("{passes}/{} trials within eps (need {need})", args.operator_trials),
            );
        }
    }

    Ok(if all_ok { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Flow(args) => run_solve(args, false),
        Command::SolveLap(args) => run_solve(args, true),
        Command::SolveSdd(args) => run_solve_sdd(args),
        Command::TreeStats(args) => run_tree_stats(args),
        Command::Verify(args) => run_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
