use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dsavoid::bounds::{self, BoundReport, Corollary, Quantity, Real};
use dsavoid::constructors::{
    cartesian_product, cayley_abelian, cayley_involutions, complete_bipartite_pow2, hypercube,
    remove_standard_matchings, CayleySpec, ColoredGraph, Group,
};
use dsavoid::graph::{standard_matchings, two_colored_cycles_through};
use dsavoid::instance::InstanceFile;
use dsavoid::lists::{generate_distance2, generate_sparse, validate_beta_sparse, ListAssignment};
use dsavoid::oracle::{oracle_avoidable, oracle_cycle_census, DEFAULT_NODE_BUDGET};
use dsavoid::ratio::{self, Rational};
use dsavoid::solver::{
    check_solution, solve_pipeline, solve_theorem2, LemmaParams, SearchStrategy, SolutionDefect,
    DEFAULT_EXHAUSTIVE_CAP,
};
use dsavoid::sweep::{run_sweep, success_by_beta, write_csv, SweepConfig};

/// Failure of a command: exit status 1 for solver/verification failures,
/// 2 for invalid input.
enum Failure {
    Solver(String),
    Input(String),
}

type CmdResult = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

#[derive(Parser)]
#[command(name = "dsavoid", version, about = "Avoid sparse lists of forbidden colors in (d,s)-edge colorable graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph with its standard coloring and write an instance file.
    Construct(ConstructArgs),
    /// Recompute s, the standard matchings and the 2-colored 4-cycle census.
    Analyze(AnalyzeArgs),
    /// Attach generated forbidden-color lists to an instance.
    GenLists(GenListsArgs),
    /// Find an avoiding coloring and store it in the instance.
    Solve(SolveArgs),
    /// Check the stored solution against the lists.
    Verify(FileArg),
    /// Decide avoidability by exhaustive search.
    Oracle(OracleArgs),
    /// Evaluate the closed-form thresholds and inequalities.
    Bounds(BoundsArgs),
    /// Run a seeded parameter sweep and write CSV rows.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Hypercube,
    CompleteBipartite,
    RemoveMatchings,
    Product,
    CayleyInvolutions,
    CayleyAbelian,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Dimension of the hypercube.
    #[arg(long)]
    d: Option<usize>,
    /// Complete bipartite graph K_{2^t,2^t}.
    #[arg(long)]
    t: Option<u32>,
    /// Number of standard matchings to remove.
    #[arg(long)]
    k: Option<usize>,
    /// Explicit colors to remove instead of the top k.
    #[arg(long, value_delimiter = ',')]
    remove: Option<Vec<u32>>,
    /// Product factors as family specs (hypercube:D, kdd:T, kdd-minus:T:K).
    #[arg(long)]
    left: Option<String>,
    #[arg(long)]
    right: Option<String>,
    /// Cyclic factor orders of the group, e.g. 2,2,2.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<u32>>,
    /// Generator set S as element indices (mixed radix, first factor fastest).
    #[arg(long, value_delimiter = ',')]
    generators: Option<Vec<usize>>,
    /// The subset S_c of S.
    #[arg(long, value_delimiter = ',')]
    commuting: Option<Vec<usize>>,
    /// The half set S_k for abelian Cayley graphs.
    #[arg(long, value_delimiter = ',')]
    half_generators: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FileArg {
    file: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenListsArgs {
    file: PathBuf,
    /// Generate a β-sparse assignment (exact rational, e.g. 1/4).
    #[arg(long, conflicts_with = "distance2")]
    beta: Option<String>,
    /// Generate lists supported on a distance-2 matching.
    #[arg(long, requires = "max_list")]
    distance2: bool,
    #[arg(long)]
    max_list: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; defaults to rewriting the input.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Mode {
    Theorem1,
    Theorem2,
    Auto,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate all d! permutations instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    /// Read (c) as "at least (1-τ)s allowed cycles".
    #[arg(long)]
    allowed_at_least: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Write the witness as the instance's solution.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: usize,
    /// β for the first-moment bound; defaults to the threshold.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Constant for the corollary checks.
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Family specs: hypercube:D, kdd:T, kdd-minus:T:K.
    #[arg(long, value_delimiter = ',', default_value = "hypercube:4")]
    families: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    beta_grid: Vec<String>,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Record wall time per row (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_rational(name: &str, text: &str) -> Result<Rational, Failure> {
    ratio::parse(text).map_err(|e| Failure::Input(format!("--{name}: {e}")))
}

fn parse_opt(name: &str, text: &Option<String>) -> Result<Option<Rational>, Failure> {
    text.as_deref().map(|t| parse_rational(name, t)).transpose()
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone().ok_or_else(|| Failure::Input(format!("--{flag} is required for this family")))
}

fn write_instance(file: &InstanceFile, out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => file.save(path).map_err(input),
        None => {
            print!("{}", file.to_json().map_err(input)?);
            Ok(())
        }
    }
}

fn construct(a: &ConstructArgs) -> CmdResult {
    let cg = match a.family {
        FamilyKind::Hypercube => hypercube(need(&a.d, "d")?),
        FamilyKind::CompleteBipartite => complete_bipartite_pow2(need(&a.t, "t")?),
        FamilyKind::RemoveMatchings => {
            let base = complete_bipartite_pow2(need(&a.t, "t")?).map_err(input)?;
            let k = match (&a.k, &a.remove) {
                (Some(k), _) => *k,
                (None, Some(r)) => r.len(),
                (None, None) => return Err(Failure::Input("--k or --remove is required".into())),
            };
            remove_standard_matchings(&base, k, a.remove.as_deref())
        }
        FamilyKind::Product => {
            let l = dsavoid::sweep::family_from_spec(&need(&a.left, "left")?).map_err(input)?;
            let r = dsavoid::sweep::family_from_spec(&need(&a.right, "right")?).map_err(input)?;
            cartesian_product(&l, &r)
        }
        FamilyKind::CayleyInvolutions => cayley_involutions(&CayleySpec {
            group: Group::CyclicProduct(need(&a.orders, "orders")?),
            generators: need(&a.generators, "generators")?,
            commuting: a.commuting.clone().unwrap_or_default(),
            half_generators: Vec::new(),
        }),
        FamilyKind::CayleyAbelian => cayley_abelian(&CayleySpec {
            group: Group::CyclicProduct(need(&a.orders, "orders")?),
            generators: Vec::new(),
            commuting: Vec::new(),
            half_generators: need(&a.half_generators, "half-generators")?,
        }),
    }
    .map_err(input)?;
    if cg.discrepancy() {
        eprintln!(
            "warning: construction claims s = {} but measured s = {}",
            cg.claimed_s.unwrap_or(0),
            cg.s
        );
    }
    write_instance(&InstanceFile::from_colored(&cg), a.out.as_deref())
}

fn load(path: &Path) -> Result<(InstanceFile, ColoredGraph), Failure> {
    let file = InstanceFile::load(path).map_err(input)?;
    let cg = file.colored_graph().map_err(input)?;
    Ok((file, cg))
}

fn analyze(a: &AnalyzeArgs) -> CmdResult {
    let (_, cg) = load(&a.file)?;
    let census: Vec<usize> = (0..cg.graph.edge_count())
        .map(|e| two_colored_cycles_through(&cg.graph, &cg.h, e).len())
        .collect();
    let brute = oracle_cycle_census(&cg.graph, &cg.h);
    let matchings: Vec<usize> = standard_matchings(&cg.graph, &cg.h).iter().map(|m| m.edges.len()).collect();
    let report = json!({
        "n": cg.n(),
        "d": cg.d,
        "m": cg.graph.edge_count(),
        "s_measured": cg.s,
        "s_claimed": cg.claimed_s,
        "discrepancy": cg.discrepancy(),
        "matching_sizes": matchings,
        "census_min": census.iter().min(),
        "census_max": census.iter().max(),
        "census_matches_scan": census == brute,
    });
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    } else {
        println!("n = {}, d = {}, |E| = {}", cg.n(), cg.d, cg.graph.edge_count());
        match cg.claimed_s {
            Some(c) => println!("s = {} (claimed {c})", cg.s),
            None => println!("s = {}", cg.s),
        }
        if cg.discrepancy() {
            println!("DISCREPANCY: claimed s exceeds measured s");
        }
        println!("standard matching sizes: {matchings:?}");
        println!(
            "2-colored 4-cycles per edge: min {}, max {} (scan agrees: {})",
            report["census_min"], report["census_max"], report["census_matches_scan"]
        );
    }
    Ok(())
}

fn gen_lists(a: &GenListsArgs) -> CmdResult {
    let (mut file, cg) = load(&a.file)?;
    let lists = if a.distance2 {
        generate_distance2(&cg, a.seed, a.max_list.unwrap_or(0)).map_err(input)?
    } else {
        let text = a
            .beta
            .as_deref()
            .ok_or_else(|| Failure::Input("one of --beta or --distance2 is required".into()))?;
        let beta = parse_rational("beta", text)?;
        if beta < ratio::int(0) {
            return Err(Failure::Input("--beta must be non-negative".into()));
        }
        let l = generate_sparse(&cg, &beta, a.seed);
        debug_assert!(validate_beta_sparse(&cg, &l, &beta).map(|r| r.ok).unwrap_or(false));
        l
    };
    eprintln!(
        "{} edges with lists, longest list {}",
        lists.support().len(),
        lists.max_list_len()
    );
    file.set_lists(&lists);
    file.solution = None;
    file.plan = None;
    file.report = None;
    write_instance(&file, Some(a.out.as_deref().unwrap_or(&a.file)))
}

fn lemma_params(cg: &ColoredGraph, a: &SolveArgs) -> Result<LemmaParams, Failure> {
    let defaults = bounds::default_params(cg.d, cg.s).map_err(input)?;
    let mut p = LemmaParams::new(
        cg.d,
        cg.s,
        ratio::int(0),
        parse_opt("gamma", &a.gamma)?.unwrap_or(defaults.gamma),
        parse_opt("tau", &a.tau)?.unwrap_or(defaults.tau),
        parse_opt("epsilon", &a.epsilon)?.unwrap_or(defaults.epsilon),
    )
    .map_err(input)?;
    if a.allowed_at_least {
        p.condition_c = dsavoid::solver::CycleCondition::AllowedAtLeast;
    }
    Ok(p)
}

fn theorem2_applies(cg: &ColoredGraph, lists: &ListAssignment) -> bool {
    lists.max_list_len() < cg.s && cg.graph.is_distance_t_matching(&lists.support(), 2)
}

fn solve(a: &SolveArgs) -> CmdResult {
    let (mut file, cg) = load(&a.file)?;
    let lists = file.list_assignment().map_err(input)?;
    let mode = match a.mode {
        Mode::Auto if theorem2_applies(&cg, &lists) => Mode::Theorem2,
        Mode::Auto => Mode::Theorem1,
        m => m,
    };
    let (coloring, cycles, report) = match mode {
        Mode::Theorem2 => {
            let sol = solve_theorem2(&cg, &lists).map_err(|e| match e {
                dsavoid::solver::SolverError::PreconditionViolated(m) => Failure::Input(m),
                other => Failure::Solver(other.to_string()),
            })?;
            let report = json!({
                "mode": "theorem2",
                "permutation": sol.permutation.images(),
                "cycles": sol.cycles.len(),
                "nodes": sol.nodes,
            });
            (sol.coloring, sol.cycles, report)
        }
        _ => {
            let p = lemma_params(&cg, a)?;
            let strategy = if a.exhaustive {
                SearchStrategy::Exhaustive {
                    cap: DEFAULT_EXHAUSTIVE_CAP,
                }
            } else {
                SearchStrategy::Random {
                    trials: a.trials,
                    seed: a.seed,
                }
            };
            let sol = solve_pipeline(&cg, &lists, &p, strategy).map_err(|f| Failure::Solver(f.to_string()))?;
            let report = json!({
                "mode": "theorem1",
                "gamma": ratio::format(&p.gamma),
                "tau": ratio::format(&p.tau),
                "epsilon": ratio::format(&p.epsilon),
                "permutation": sol.permutation.rho.images(),
                "trials": sol.permutation.trials,
                "cycles": sol.plan.selections.len(),
                "max_vertex_used": sol.plan.vertex_used.iter().max(),
            });
            let cycles = sol.plan.cycles();
            (sol.coloring, cycles, report)
        }
    };
    check_solution(&cg, &coloring, &lists).map_err(|d| Failure::Solver(format!("re-verification failed: {d}")))?;
    eprintln!("solved: {report}");
    file.solution = Some(coloring.colors().to_vec());
    file.set_plan(&cycles);
    file.report = Some(report);
    write_instance(&file, a.out.as_deref())
}

fn verify(a: &FileArg) -> CmdResult {
    let (file, cg) = load(&a.file)?;
    let lists = file.list_assignment().map_err(input)?;
    let solution = file
        .solution_coloring()
        .ok_or_else(|| Failure::Input("instance has no solution block".into()))?;
    match check_solution(&cg, &solution, &lists) {
        Ok(()) => {
            println!("verified: proper {}-edge coloring avoiding all lists", cg.d);
            Ok(())
        }
        Err(SolutionDefect::Conflict { edge, color }) => {
            let (u, v) = cg.graph.endpoints(edge);
            Err(Failure::Solver(format!(
                "conflict at edge {edge} ({u}-{v}): color {color} is forbidden"
            )))
        }
        Err(d) => Err(Failure::Solver(d.to_string())),
    }
}

fn oracle(a: &OracleArgs) -> CmdResult {
    let (mut file, cg) = load(&a.file)?;
    let lists = file.list_assignment().map_err(input)?;
    let r = oracle_avoidable(&cg.graph, cg.d, &lists, a.budget).map_err(|e| Failure::Solver(e.to_string()))?;
    println!("avoidable: {} ({} nodes)", r.avoidable, r.nodes_explored);
    match r.witness {
        Some(w) => {
            if let Some(out) = &a.out {
                file.solution = Some(w.colors().to_vec());
                file.plan = None;
                file.report = Some(json!({"mode": "oracle", "nodes": r.nodes_explored}));
                file.save(out).map_err(input)?;
            }
            Ok(())
        }
        None => Err(Failure::Solver("lists are not avoidable".into())),
    }
}

fn quantity_json(q: &Quantity) -> serde_json::Value {
    match q {
        Quantity::Log2(l) => json!({"log2": l.to_decimal(), "approx_log2": l.to_f64()}),
        Quantity::Exact(r) => json!({"exact": ratio::format(r), "approx": ratio::to_f64(r)}),
    }
}

fn report_json(r: &BoundReport) -> serde_json::Value {
    let components: serde_json::Map<String, serde_json::Value> =
        r.components.iter().map(|(n, q)| (n.clone(), quantity_json(q))).collect();
    json!({"value": quantity_json(&r.value), "satisfied": r.satisfied, "components": components})
}

fn bounds_cmd(a: &BoundsArgs) -> CmdResult {
    let threshold = bounds::beta_threshold(a.n, a.d, a.s).map_err(input)?;
    let defaults = bounds::default_params(a.d.max(a.s), a.s).map_err(input)?;
    let gamma = parse_opt("gamma", &a.gamma)?.unwrap_or(defaults.gamma);
    let tau = parse_opt("tau", &a.tau)?.unwrap_or(defaults.tau);
    let epsilon = parse_opt("epsilon", &a.epsilon)?.unwrap_or(defaults.epsilon);
    let beta = match parse_opt("beta", &a.beta)? {
        Some(b) => Real::Exact(b),
        None => Real::Pow2(threshold.clone()),
    };
    let mut out = serde_json::Map::new();
    out.insert(
        "beta_threshold".into(),
        json!({"log2": bounds::bigfloat_decimal(&threshold), "approx_log2": bounds::bigfloat_to_f64(&threshold)}),
    );
    out.insert(
        "params".into(),
        json!({"gamma": ratio::format(&gamma), "tau": ratio::format(&tau), "epsilon": ratio::format(&epsilon)}),
    );
    match bounds::lemma1_lhs(a.n, a.d, a.s, &beta, &gamma, &tau) {
        Ok(r) => out.insert("lemma1".into(), report_json(&r)),
        Err(e) => out.insert("lemma1".into(), json!({"error": e.to_string()})),
    };
    let margin = bounds::lemma2_margin(a.d, a.s, &gamma, &tau, &epsilon).map_err(input)?;
    out.insert("lemma2_margin".into(), report_json(&margin));
    if a.s <= a.d {
        let kappa = Rational::new(a.s.into(), a.d.into());
        let (c1, c2) = bounds::corollary_constants(&kappa).map_err(input)?;
        out.insert(
            "corollary_constants".into(),
            json!({"kappa": ratio::format(&kappa), "c1": ratio::format(&c1), "c2": ratio::format(&c2)}),
        );
    }
    if let Some(c) = parse_opt("c", &a.c)? {
        for (name, variant) in [("corollary4", Corollary::Four), ("corollary5", Corollary::Five)] {
            match bounds::corollary45_check(a.n, a.d, a.s, &c, variant) {
                Ok(r) => out.insert(name.into(), report_json(&r)),
                Err(e) => out.insert(name.into(), json!({"error": e.to_string()})),
            };
        }
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        return Ok(());
    }
    println!("n = {}, d = {}, s = {}", a.n, a.d, a.s);
    for (key, value) in &out {
        println!("{key}:");
        print_tree(value, 1);
    }
    Ok(())
}

fn print_tree(v: &serde_json::Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        serde_json::Value::Object(map) => {
            for (k, x) in map {
                if x.is_object() {
                    println!("{pad}{k}:");
                    print_tree(x, depth + 1);
                } else {
                    println!("{pad}{k}: {}", x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string()));
                }
            }
        }
        other => println!("{pad}{other}"),
    }
}

fn sweep(a: &SweepArgs) -> CmdResult {
    let cfg = SweepConfig {
        families: a.families.clone(),
        betas: a
            .beta_grid
            .iter()
            .map(|b| parse_rational("beta-grid", b))
            .collect::<Result<_, _>>()?,
        seeds: a.seeds,
        gamma: parse_opt("gamma", &a.gamma)?,
        tau: parse_opt("tau", &a.tau)?,
        epsilon: parse_opt("epsilon", &a.epsilon)?,
        trials: a.trials,
        timing: a.timing,
    };
    let rows = run_sweep(&cfg).map_err(input)?;
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).map_err(input)?;
            write_csv(&rows, f).map_err(input)?;
        }
        None => write_csv(&rows, std::io::stdout()).map_err(input)?,
    }
    for (beta, ok, total) in success_by_beta(&rows) {
        eprintln!("beta {beta}: {ok}/{total} verified");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Construct(a) => construct(a),
        Command::Analyze(a) => analyze(a),
        Command::GenLists(a) => gen_lists(a),
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Oracle(a) => oracle(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(msg)) => {
            eprintln!("failure: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("invalid input: {msg}");
            ExitCode::from(2)
        }
    }
}
