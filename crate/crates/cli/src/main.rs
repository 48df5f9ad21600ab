//! `budgex`: plan, certify, and benchmark budgeted data exchange on
//! exchange graphs.
//!
//! Exit codes: 0 success, 1 infeasible or malformed input, 2 internal
//! failure.

use budgex_core::certify::{
    nlc_upper_bound, nlc_upper_bound_value, oracle_opt, smooth_upper_bound,
    smooth_upper_bound_value, CertifyError, DEFAULT_ORACLE_CAP,
};
use budgex_core::cover::apx_vertex_cover;
use budgex_core::graph::{random_exchange_graph, EdgeSet, ExchangeGraph, RandomGraphParams};
use budgex_core::greedy::{
    cost_benefit_greedy, edge_greedy_baseline, random_baseline, vertex_greedy_uniform,
    GreedyOptions, Pick, PlanResult, Screening,
};
use budgex_core::objectives::{ObjectiveKind, ObjectiveSpec};
use budgex_core::posegraph::{
    attach_chain_context, generate_manhattan, parse_g2o, write_g2o, ManhattanParams, PoseGraph2D,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "budgex", version, about = "Budgeted data-exchange planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance (exchange graph + pose graph) to files.
    Generate {
        #[command(subcommand)]
        source: GenerateCmd,
    },
    /// Select observations to broadcast under a budget.
    Plan(PlanArgs),
    /// Vertex-cover queries on an exchange graph.
    Cover(CoverArgs),
    /// Upper-bound certificates for the budgeted problem.
    Certify(CertifyArgs),
    /// Sweep algorithms/budgets/densities and emit CSV.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Manhattan-world random walks with candidate loop closures.
    Manhattan {
        #[arg(long, default_value_t = 10)]
        grid_size: usize,
        #[arg(long, default_value_t = 5)]
        robots: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        odom_sigma_xy: f64,
        #[arg(long, default_value_t = 0.01)]
        odom_sigma_theta: f64,
        #[arg(long, default_value_t = 1.0)]
        loop_radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Random n-partite exchange graph (no pose context).
    Random {
        #[arg(long, default_value_t = 2)]
        robots: usize,
        #[arg(long, default_value_t = 10)]
        verts_per_robot: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long, default_value_t = 1.0)]
        w_min: f64,
        #[arg(long, default_value_t = 1.0)]
        w_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Greedy,
    Cbgreedy,
    Edge,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Nlc,
    Wst,
    Fim,
}

impl From<ObjectiveArg> for ObjectiveKind {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Nlc => ObjectiveKind::Nlc,
            ObjectiveArg::Wst => ObjectiveKind::Wst,
            ObjectiveArg::Fim => ObjectiveKind::Fim,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Pose graph (g2o or JSON); required for wst/fim.
    #[arg(long)]
    posegraph: Option<PathBuf>,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    #[arg(long)]
    budget: f64,
    #[arg(long, value_enum, default_value = "greedy")]
    algo: AlgoArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disable cover recomputation in the uniform greedy.
    #[arg(long)]
    no_recover: bool,
    /// Write the selection trace as CSV (round,vertex,gain,cost,value).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    graph: PathBuf,
    /// JSON array of edge ids; defaults to every edge.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Oracle,
    Lp,
    Fw,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    posegraph: Option<PathBuf>,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    #[arg(long)]
    budget: f64,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Frank-Wolfe iterations.
    #[arg(long, default_value_t = 150)]
    iters: usize,
    /// Exhaustive-oracle size cap.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock runtimes (breaks byte-identical reruns).
    #[arg(long)]
    timings: bool,
}

/// Input problems exit 1, internal failures exit 2.
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn input(msg: impl std::fmt::Display) -> Self {
        CliError::Input(msg.to_string())
    }

    fn internal(msg: impl std::fmt::Display) -> Self {
        CliError::Internal(msg.to_string())
    }
}

fn classify_certify(e: CertifyError) -> CliError {
    match e {
        CertifyError::InstanceTooLarge { .. } | CertifyError::WrongObjective(_) => {
            CliError::input(e)
        }
        CertifyError::Objective(inner) => classify_objective(inner),
        CertifyError::Greedy(inner) => CliError::input(inner),
        CertifyError::LpFailed(_) => CliError::internal(e),
    }
}

fn classify_objective(e: budgex_core::objectives::ObjectiveError) -> CliError {
    use budgex_core::objectives::ObjectiveError::*;
    match e {
        FactorizationFailure => CliError::internal(e),
        other => CliError::input(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_thread_pool()?;
    match cli.command {
        Command::Generate { source } => cmd_generate(source),
        Command::Plan(args) => cmd_plan(args),
        Command::Cover(args) => cmd_cover(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// `BUDGEX_THREADS` caps the rayon pool.
fn init_thread_pool() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("BUDGEX_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| CliError::input(format!("BUDGEX_THREADS must be an integer, got {raw}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .map_err(CliError::internal)?;
    }
    Ok(())
}

/// Prints to stdout, exiting quietly when the consumer hangs up (`| head`).
fn emit(text: &str) {
    let mut out = std::io::stdout();
    if out.write_all(text.as_bytes()).is_err() || out.write_all(b"\n").is_err() {
        std::process::exit(0);
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<ExchangeGraph, CliError> {
    let text = read_file(path)?;
    ExchangeGraph::from_json_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_posegraph(path: &Path) -> Result<PoseGraph2D, CliError> {
    let text = read_file(path)?;
    let is_json = path.extension().is_some_and(|x| x == "json");
    if is_json {
        PoseGraph2D::from_json_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    } else {
        let (pg, warnings) =
            parse_g2o(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        for w in warnings {
            eprintln!("warning: {}: {w}", path.display());
        }
        Ok(pg)
    }
}

fn build_spec(
    objective: ObjectiveArg,
    g: &ExchangeGraph,
    posegraph: Option<&PoseGraph2D>,
) -> Result<ObjectiveSpec, CliError> {
    ObjectiveSpec::for_kind(objective.into(), g, posegraph).map_err(classify_objective)
}

fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_generate(source: GenerateCmd) -> Result<(), CliError> {
    match source {
        GenerateCmd::Manhattan {
            grid_size,
            robots,
            steps,
            odom_sigma_xy,
            odom_sigma_theta,
            loop_radius,
            seed,
            out,
        } => {
            let params = ManhattanParams {
                grid_size,
                n_robots: robots,
                steps_per_robot: steps,
                odom_sigma_xy,
                odom_sigma_theta,
                loop_radius,
                seed,
            };
            let (pg, xg) = generate_manhattan(&params).map_err(CliError::input)?;
            write_output(&out.join("exchange.json"), &xg.to_json_string())?;
            write_output(&out.join("pose_graph.g2o"), &write_g2o(&pg))?;
            emit(&format!(
                "wrote {} ({} vertices, {} candidates) and {}",
                out.join("exchange.json").display(),
                xg.vertex_count(),
                xg.edge_count(),
                out.join("pose_graph.g2o").display()
            ));
            Ok(())
        }
        GenerateCmd::Random {
            robots,
            verts_per_robot,
            max_degree,
            w_min,
            w_max,
            seed,
            out,
        } => {
            let g = random_exchange_graph(&RandomGraphParams {
                n_robots: robots,
                verts_per_robot,
                max_degree,
                weight_range: (w_min, w_max),
                seed,
            })
            .map_err(CliError::input)?;
            write_output(&out.join("exchange.json"), &g.to_json_string())?;
            emit(&format!(
                "wrote {} ({} vertices, {} edges)",
                out.join("exchange.json").display(),
                g.vertex_count(),
                g.edge_count()
            ));
            Ok(())
        }
    }
}

fn run_algo(
    algo: AlgoArg,
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    budget: f64,
    seed: u64,
    no_recover: bool,
) -> Result<PlanResult, CliError> {
    let opts = GreedyOptions {
        recompute_cover: !no_recover,
        screening: Screening::Lazy,
    };
    let plan = match algo {
        AlgoArg::Greedy => {
            if (budget - budget.round()).abs() > 1e-9 {
                return Err(CliError::input(
                    "algo greedy uses a cardinality budget; pass an integer --budget",
                ));
            }
            vertex_greedy_uniform(g, spec, budget.round() as usize, &opts)
        }
        AlgoArg::Cbgreedy => cost_benefit_greedy(g, spec, budget, &opts),
        AlgoArg::Edge => edge_greedy_baseline(g, spec, budget),
        AlgoArg::Random => random_baseline(g, spec, budget, seed),
    };
    plan.map_err(CliError::input)
}

fn trace_csv(plan: &PlanResult) -> String {
    let mut out = String::from("round,vertex,gain,cost,value\n");
    use std::fmt::Write;
    for step in &plan.trace {
        let pick = match step.pick {
            Pick::Vertex(v) => format!("{v}"),
            Pick::Edge(e) => format!("e{e}"),
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            step.round, pick, step.gain, step.cost, step.value
        )
        .unwrap();
    }
    out
}

fn cmd_plan(args: PlanArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let pg = args.posegraph.as_deref().map(load_posegraph).transpose()?;
    let spec = build_spec(args.objective, &g, pg.as_ref())?;
    let plan = run_algo(
        args.algo,
        &g,
        &spec,
        args.budget,
        args.seed,
        args.no_recover,
    )?;
    if let Some(path) = &args.trace {
        write_output(path, &trace_csv(&plan))?;
    }
    emit(&serde_json::to_string_pretty(&plan).unwrap());
    Ok(())
}

fn cmd_cover(args: CoverArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let es = match &args.edges {
        Some(path) => {
            let ids: Vec<usize> = serde_json::from_str(&read_file(path)?)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let es = EdgeSet::from_ids(ids);
            g.check_edge_set(&es).map_err(CliError::input)?;
            es
        }
        None => g.all_edges(),
    };
    let result = apx_vertex_cover(&g, &es);
    emit(&serde_json::to_string_pretty(&result).unwrap());
    Ok(())
}

fn cmd_certify(args: CertifyArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph)?;
    let pg = args.posegraph.as_deref().map(load_posegraph).transpose()?;
    let spec = build_spec(args.objective, &g, pg.as_ref())?;
    let cert = match args.method {
        MethodArg::Oracle => oracle_opt(&g, &spec, args.budget, args.cap),
        MethodArg::Lp => {
            if spec.kind() != ObjectiveKind::Nlc {
                return Err(CliError::input(
                    "the LP bound applies to the nlc objective; use --method fw for wst/fim",
                ));
            }
            nlc_upper_bound(&g, args.budget)
        }
        MethodArg::Fw => smooth_upper_bound(&g, &spec, args.budget, args.iters),
    }
    .map_err(classify_certify)?;
    emit(&serde_json::to_string_pretty(&cert).unwrap());
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum InstanceSource {
    Manhattan {
        #[serde(default = "default_grid")]
        grid_size: usize,
        robots: usize,
        steps: usize,
        #[serde(default = "default_sigma_xy")]
        odom_sigma_xy: f64,
        #[serde(default = "default_sigma_theta")]
        odom_sigma_theta: f64,
        loop_radius: f64,
        seed: u64,
    },
    Random {
        robots: usize,
        verts_per_robot: usize,
        max_degree: usize,
        #[serde(default = "default_weight")]
        w_min: f64,
        #[serde(default = "default_weight")]
        w_max: f64,
        seed: u64,
    },
    File {
        graph: PathBuf,
        posegraph: Option<PathBuf>,
    },
}

fn default_grid() -> usize {
    10
}
fn default_sigma_xy() -> f64 {
    0.05
}
fn default_sigma_theta() -> f64 {
    0.01
}
fn default_weight() -> f64 {
    1.0
}

fn default_fw_iters() -> usize {
    100
}

#[derive(Debug, Deserialize)]
struct BenchConfig {
    instance: InstanceSource,
    objectives: Vec<ObjectiveKind>,
    algos: Vec<String>,
    budgets: Vec<f64>,
    #[serde(default)]
    max_degrees: Option<Vec<usize>>,
    seeds: Vec<u64>,
    /// Optional bound column: "lp" (nlc) or "fw" (wst/fim).
    #[serde(default)]
    bound: Option<String>,
    #[serde(default = "default_fw_iters")]
    fw_iters: usize,
}

struct BenchInstance {
    graph: ExchangeGraph,
    posegraph: Option<PoseGraph2D>,
}

fn load_instance(source: &InstanceSource) -> Result<BenchInstance, CliError> {
    match source {
        InstanceSource::Manhattan {
            grid_size,
            robots,
            steps,
            odom_sigma_xy,
            odom_sigma_theta,
            loop_radius,
            seed,
        } => {
            let (pg, xg) = generate_manhattan(&ManhattanParams {
                grid_size: *grid_size,
                n_robots: *robots,
                steps_per_robot: *steps,
                odom_sigma_xy: *odom_sigma_xy,
                odom_sigma_theta: *odom_sigma_theta,
                loop_radius: *loop_radius,
                seed: *seed,
            })
            .map_err(CliError::input)?;
            Ok(BenchInstance {
                graph: xg,
                posegraph: Some(pg),
            })
        }
        InstanceSource::Random {
            robots,
            verts_per_robot,
            max_degree,
            w_min,
            w_max,
            seed,
        } => {
            let g = random_exchange_graph(&RandomGraphParams {
                n_robots: *robots,
                verts_per_robot: *verts_per_robot,
                max_degree: *max_degree,
                weight_range: (*w_min, *w_max),
                seed: *seed,
            })
            .map_err(CliError::input)?;
            Ok(BenchInstance {
                graph: g,
                posegraph: None,
            })
        }
        InstanceSource::File { graph, posegraph } => Ok(BenchInstance {
            graph: load_graph(graph)?,
            posegraph: posegraph.as_deref().map(load_posegraph).transpose()?,
        }),
    }
}

struct BenchRow {
    algo: String,
    objective: ObjectiveKind,
    budget: f64,
    max_degree: Option<usize>,
    seed: u64,
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let config: BenchConfig = serde_json::from_str(&read_file(&args.config)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.config.display())))?;
    if config.objectives.is_empty()
        || config.algos.is_empty()
        || config.budgets.is_empty()
        || config.seeds.is_empty()
    {
        return Err(CliError::input(
            "bench config needs non-empty objectives, algos, budgets, and seeds",
        ));
    }
    let base = load_instance(&config.instance)?;
    let degrees: Vec<Option<usize>> = match &config.max_degrees {
        Some(list) if !list.is_empty() => list.iter().map(|&d| Some(d)).collect(),
        _ => vec![None],
    };

    // pruned variants and per-(degree, objective) contexts prepared up front
    struct Prepared {
        graph: ExchangeGraph,
        posegraph: Option<PoseGraph2D>,
    }
    let mut prepared: Vec<(Option<usize>, Prepared)> = Vec::new();
    for &deg in &degrees {
        let graph = match deg {
            Some(d) => base.graph.prune_to_max_degree(d, 0),
            None => base.graph.clone(),
        };
        // a pose context is required for wst/fim; synthesize one for plain
        // random instances
        let needs_pg = config
            .objectives
            .iter()
            .any(|k| *k != ObjectiveKind::Nlc);
        let posegraph = if let Some(pg) = &base.posegraph {
            Some(pg.clone())
        } else if needs_pg {
            let (pg, remapped) =
                attach_chain_context(&graph, 0.05, 0.02, 0).map_err(CliError::input)?;
            prepared.push((
                deg,
                Prepared {
                    graph: remapped,
                    posegraph: Some(pg),
                },
            ));
            continue;
        } else {
            None
        };
        prepared.push((deg, Prepared { graph, posegraph }));
    }

    let mut rows: Vec<BenchRow> = Vec::new();
    for (deg, _) in &prepared {
        for &objective in &config.objectives {
            for &budget in &config.budgets {
                for &seed in &config.seeds {
                    for algo in &config.algos {
                        rows.push(BenchRow {
                            algo: algo.clone(),
                            objective,
                            budget,
                            max_degree: *deg,
                            seed,
                        });
                    }
                }
            }
        }
    }

    use rayon::prelude::*;
    let lines: Vec<String> = rows
        .par_iter()
        .map(|row| {
            let prep = prepared
                .iter()
                .find(|(d, _)| *d == row.max_degree)
                .map(|(_, p)| p)
                .expect("prepared for every degree");
            bench_row(row, &prep.graph, prep.posegraph.as_ref(), &config, args.timings)
        })
        .collect();

    let mut out = String::from(
        "algo,objective,budget,max_degree,seed,value,normalized,upper_bound,runtime_ms\n",
    );
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    match &args.out {
        Some(path) => write_output(path, &out)?,
        None => {
            std::io::stdout()
                .write_all(out.as_bytes())
                .map_err(CliError::internal)?;
        }
    }
    Ok(())
}

fn bench_row(
    row: &BenchRow,
    g: &ExchangeGraph,
    pg: Option<&PoseGraph2D>,
    config: &BenchConfig,
    timings: bool,
) -> String {
    let start = std::time::Instant::now();
    let result = (|| -> Result<(f64, f64, f64), CliError> {
        let spec = build_spec_kind(row.objective, g, pg)?;
        let algo = match row.algo.as_str() {
            "greedy" => AlgoArg::Greedy,
            "cbgreedy" => AlgoArg::Cbgreedy,
            "edge" => AlgoArg::Edge,
            "random" => AlgoArg::Random,
            other => return Err(CliError::input(format!("unknown algo `{other}`"))),
        };
        let plan = run_algo(algo, g, &spec, row.budget, row.seed, false)?;
        let denom = spec
            .eval_edges(g, &g.all_edges())
            .map_err(classify_objective)?;
        let normalized = if denom.abs() < 1e-12 {
            0.0
        } else {
            plan.value / denom
        };
        let bound = match config.bound.as_deref() {
            Some("lp") if row.objective == ObjectiveKind::Nlc => {
                nlc_upper_bound_value(g, row.budget).map_err(classify_certify)?
            }
            Some("fw") if row.objective != ObjectiveKind::Nlc => {
                smooth_upper_bound_value(g, &spec, row.budget, config.fw_iters)
                    .map_err(classify_certify)?
            }
            _ => f64::NAN,
        };
        Ok((plan.value, normalized, bound))
    })();
    let runtime_ms = if timings {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let degree = row
        .max_degree
        .map_or(String::from(""), |d| d.to_string());
    match result {
        Ok((value, normalized, bound)) => {
            let bound = if bound.is_nan() {
                String::from("")
            } else {
                format!("{bound}")
            };
            format!(
                "{},{},{},{},{},{},{},{},{}",
                row.algo,
                row.objective,
                row.budget,
                degree,
                row.seed,
                value,
                normalized,
                bound,
                runtime_ms
            )
        }
        Err(e) => {
            let msg = match e {
                CliError::Input(m) | CliError::Internal(m) => m,
            };
            eprintln!(
                "bench row failed (algo={}, objective={}, budget={}): {msg}",
                row.algo, row.objective, row.budget
            );
            format!(
                "{},{},{},{},{},nan,nan,,{}",
                row.algo, row.objective, row.budget, degree, row.seed, runtime_ms
            )
        }
    }
}

fn build_spec_kind(
    kind: ObjectiveKind,
    g: &ExchangeGraph,
    pg: Option<&PoseGraph2D>,
) -> Result<ObjectiveSpec, CliError> {
    ObjectiveSpec::for_kind(kind, g, pg).map_err(classify_objective)
}
