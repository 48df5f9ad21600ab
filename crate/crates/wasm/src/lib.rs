//! Browser bindings for the demo page: generate a simulated rendezvous,
//! plan under a budget, and sweep budgets for the value curves. All
//! functions exchange JSON strings so the page needs no generated types,
//! and everything is seed-deterministic (no ambient randomness), which
//! keeps the crate portable to wasm32 without extra features.

use budgex_core::certify::nlc_upper_bound_value;
use budgex_core::graph::ExchangeGraph;
use budgex_core::greedy::{
    cost_benefit_greedy, edge_greedy_baseline, random_baseline, vertex_greedy_uniform,
    GreedyOptions, PlanResult,
};
use budgex_core::objectives::{ObjectiveKind, ObjectiveSpec};
use budgex_core::posegraph::{generate_manhattan, EdgeKind, ManhattanParams, PoseGraph2D};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Deserialize)]
struct GenerateParams {
    #[serde(default = "d_grid")]
    grid_size: usize,
    #[serde(default = "d_robots")]
    robots: usize,
    #[serde(default = "d_steps")]
    steps: usize,
    #[serde(default = "d_radius")]
    loop_radius: f64,
    #[serde(default)]
    seed: u64,
    /// Optional density cap on the exchange graph.
    #[serde(default)]
    max_degree: Option<usize>,
}

fn d_grid() -> usize {
    8
}
fn d_robots() -> usize {
    3
}
fn d_steps() -> usize {
    40
}
fn d_radius() -> f64 {
    1.0
}

/// Everything the page needs: the planning instance plus drawing data.
#[derive(Serialize, Deserialize)]
struct Instance {
    exchange: ExchangeGraph,
    pose_graph: PoseGraph2D,
    robots: usize,
    /// Robot owning each pose (for trajectory colors).
    pose_robot: Vec<usize>,
    /// Pose id behind each exchange vertex (for placing markers).
    vertex_pose: Vec<usize>,
}

fn build_instance(params: &GenerateParams) -> Result<Instance, String> {
    let (pg, xg) = generate_manhattan(&ManhattanParams {
        grid_size: params.grid_size,
        n_robots: params.robots,
        steps_per_robot: params.steps,
        loop_radius: params.loop_radius,
        seed: params.seed,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let xg = match params.max_degree {
        Some(d) => xg.prune_to_max_degree(d, params.seed),
        None => xg,
    };
    let chain = params.steps + 1;
    let pose_robot = (0..pg.pose_count()).map(|p| p / chain).collect();
    let vertex_pose = vertex_to_pose(&xg, &pg)?;
    Ok(Instance {
        robots: params.robots,
        pose_robot,
        vertex_pose,
        exchange: xg,
        pose_graph: pg,
    })
}

fn vertex_to_pose(xg: &ExchangeGraph, pg: &PoseGraph2D) -> Result<Vec<usize>, String> {
    let mut map = vec![usize::MAX; xg.vertex_count()];
    for e in xg.edges() {
        let pid = e.pg_edge.ok_or("exchange edge without pose mapping")?;
        let pe = pg.edge(pid).map_err(|e| e.to_string())?;
        if pe.kind != EdgeKind::Candidate {
            return Err("mapped pose edge is not a candidate".into());
        }
        map[e.u] = pe.i;
        map[e.v] = pe.j;
    }
    if map.contains(&usize::MAX) {
        return Err("exchange vertex without incident candidate".into());
    }
    Ok(map)
}

fn parse_instance(instance_json: &str) -> Result<Instance, String> {
    serde_json::from_str(instance_json).map_err(|e| format!("bad instance: {e}"))
}

fn spec_for(instance: &Instance, objective: &str) -> Result<ObjectiveSpec, String> {
    let kind: ObjectiveKind = objective.parse()?;
    ObjectiveSpec::for_kind(kind, &instance.exchange, Some(&instance.pose_graph))
        .map_err(|e| e.to_string())
}

fn run_plan(
    instance: &Instance,
    objective: &str,
    algo: &str,
    budget: f64,
    seed: u64,
) -> Result<(PlanResult, f64), String> {
    let g = &instance.exchange;
    let spec = spec_for(instance, objective)?;
    let opts = GreedyOptions::default();
    let plan = match algo {
        "greedy" => vertex_greedy_uniform(g, &spec, budget.round() as usize, &opts),
        "cbgreedy" => cost_benefit_greedy(g, &spec, budget, &opts),
        "edge" => edge_greedy_baseline(g, &spec, budget),
        "random" => random_baseline(g, &spec, budget, seed),
        other => return Err(format!("unknown algo `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    let denom = spec
        .eval_edges(g, &g.all_edges())
        .map_err(|e| e.to_string())?;
    Ok((plan, denom))
}

#[derive(Serialize)]
struct PlanView {
    plan: PlanResult,
    normalized: f64,
    max_value: f64,
    /// Pose ids of the broadcast observations.
    selected_poses: Vec<usize>,
    /// Pose-pair endpoints of the verifiable loop closures.
    covered_pairs: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct SweepPoint {
    budget: f64,
    greedy: f64,
    edge: f64,
    random_mean: f64,
    bound: Option<f64>,
}

fn run_sweep(
    instance: &Instance,
    objective: &str,
    budgets: &[f64],
) -> Result<Vec<SweepPoint>, String> {
    let g = &instance.exchange;
    let spec = spec_for(instance, objective)?;
    let denom = spec
        .eval_edges(g, &g.all_edges())
        .map_err(|e| e.to_string())?;
    let scale = if denom.abs() < 1e-12 { 1.0 } else { denom };
    let opts = GreedyOptions::default();
    let mut points = Vec::new();
    for &b in budgets {
        let greedy = vertex_greedy_uniform(g, &spec, b.round() as usize, &opts)
            .map_err(|e| e.to_string())?;
        let edge = edge_greedy_baseline(g, &spec, b).map_err(|e| e.to_string())?;
        let mut random_sum = 0.0;
        for seed in 0..10 {
            random_sum += random_baseline(g, &spec, b, seed)
                .map_err(|e| e.to_string())?
                .value;
        }
        let bound = if spec.kind() == ObjectiveKind::Nlc {
            nlc_upper_bound_value(g, b).ok().map(|v| v / scale)
        } else {
            None
        };
        points.push(SweepPoint {
            budget: b,
            greedy: greedy.value / scale,
            edge: edge.value / scale,
            random_mean: random_sum / 10.0 / scale,
            bound,
        });
    }
    Ok(points)
}

/// Generates a Manhattan rendezvous instance; `params_json` may set
/// `grid_size`, `robots`, `steps`, `loop_radius`, `seed`, `max_degree`.
#[wasm_bindgen]
pub fn demo_generate(params_json: &str) -> Result<String, String> {
    let params: GenerateParams =
        serde_json::from_str(params_json).map_err(|e| format!("bad params: {e}"))?;
    let instance = build_instance(&params)?;
    serde_json::to_string(&instance).map_err(|e| e.to_string())
}

/// Plans on a generated instance and returns the plan plus drawing data.
#[wasm_bindgen]
pub fn demo_plan(
    instance_json: &str,
    objective: &str,
    algo: &str,
    budget: f64,
    seed: u64,
) -> Result<String, String> {
    let instance = parse_instance(instance_json)?;
    let (plan, denom) = run_plan(&instance, objective, algo, budget, seed)?;
    let scale = if denom.abs() < 1e-12 { 1.0 } else { denom };
    let selected_poses = plan
        .v_grd
        .iter()
        .map(|v| instance.vertex_pose[v])
        .collect();
    let covered_pairs = plan
        .l_grd
        .iter()
        .map(|e| {
            let edge = instance.exchange.edge(e);
            (
                instance.vertex_pose[edge.u],
                instance.vertex_pose[edge.v],
            )
        })
        .collect();
    let view = PlanView {
        normalized: plan.value / scale,
        max_value: denom,
        selected_poses,
        covered_pairs,
        plan,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Normalized value-vs-budget curves for greedy, edge greedy, and the mean
/// of ten random baselines (plus the LP bound under NLC).
#[wasm_bindgen]
pub fn demo_sweep(instance_json: &str, objective: &str, budgets_json: &str) -> Result<String, String> {
    let instance = parse_instance(instance_json)?;
    let budgets: Vec<f64> =
        serde_json::from_str(budgets_json).map_err(|e| format!("bad budgets: {e}"))?;
    let points = run_sweep(&instance, objective, &budgets)?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}
