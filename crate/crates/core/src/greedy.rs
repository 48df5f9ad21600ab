//! Budgeted planning algorithms over the vertex view, plus baselines.
//!
//! The main planner is the greedy vertex selector: pick the highest
//! marginal-gain observation until the budget is exhausted, then recompute a
//! vertex cover of the covered loop closures; when the cover is cheaper than
//! the number of broadcasts spent, the freed budget buys extra greedy rounds
//! and the final plan is the previous cover plus the latest picks. The plain
//! (no-recompute) variant keeps the any-com property: its trace prefix at
//! cost `b'` is exactly the plan for budget `b'`.
//!
//! Screening candidates within a round runs against a frozen
//! [`EvalState`] either exhaustively (optionally fanned out with rayon) or
//! lazily, reusing stale upper bounds as submodularity permits. Both return
//! the same winner: maximum gain, ties to the smallest id.

use crate::cover::{apx_vertex_cover, is_cover, CoverError, CoverResult};
use crate::graph::{EdgeId, EdgeSet, ExchangeGraph, GraphError, VertexId, VertexSet};
use crate::objectives::{EvalState, ObjectiveError, ObjectiveSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GreedyError {
    #[error("uniform-weight greedy requires unit vertex weights (vertex {0} has {1})")]
    NonUniformWeights(VertexId, f64),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How candidates are screened within one greedy round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Screening {
    /// Stale-bound priority queue; skips most evaluations on submodular
    /// objectives.
    #[default]
    Lazy,
    /// Evaluate every remaining candidate.
    Exhaustive,
    /// Exhaustive scan fanned out across the rayon pool.
    #[cfg(feature = "parallel")]
    Parallel,
}

#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions {
    /// Recompute the vertex cover after each budget-exhausting round and
    /// reinvest the freed budget (on by default).
    pub recompute_cover: bool,
    pub screening: Screening,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            recompute_cover: true,
            screening: Screening::default(),
        }
    }
}

impl GreedyOptions {
    pub fn no_recompute() -> Self {
        Self {
            recompute_cover: false,
            ..Self::default()
        }
    }
}

/// One selection in a plan trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub round: usize,
    pub pick: Pick,
    pub gain: f64,
    /// Running cost after this pick, reflecting cover recomputations so far.
    pub cost: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pick {
    Vertex(VertexId),
    Edge(EdgeId),
}

/// Output of every planner: the broadcast set, the verifiable loop closures,
/// the achieved objective value, and a cover certifying budget feasibility.
#[derive(Debug, Clone, Serialize)]
pub struct PlanResult {
    pub algo: String,
    pub trace: Vec<TraceStep>,
    pub v_grd: VertexSet,
    pub l_grd: EdgeSet,
    pub value: f64,
    pub cost: f64,
    pub cover: CoverResult,
    /// Greedy rounds beyond the nominal budget bought by cover recomputation.
    pub extra_rounds: usize,
    /// Objective evaluations per greedy round (screening diagnostics).
    pub evals_per_round: Vec<usize>,
}

/// Budget-feasibility certificate: the cheaper of the recomputed cover and
/// the selected vertices themselves (restricted to covering duty).
fn attach_cover(
    g: &ExchangeGraph,
    v_grd: &VertexSet,
    l_grd: &EdgeSet,
) -> Result<CoverResult, GreedyError> {
    let computed = apx_vertex_cover(g, l_grd);
    let own_weight: f64 = v_grd.iter().map(|v| g.weight(v)).sum();
    if computed.value <= own_weight {
        return Ok(computed);
    }
    // the selection always covers its own lift; drop isolated vertices
    let used = VertexSet::from_ids(v_grd.iter().filter(|&v| {
        g.incident_edges(v).iter().any(|&e| l_grd.contains(e))
    }));
    let value = used.iter().map(|v| g.weight(v)).sum();
    debug_assert!(is_cover(g, &used, l_grd)?);
    Ok(CoverResult {
        cover: used,
        value,
        exact: false,
        lp_value: computed.lp_value,
    })
}

/// Entry ordering: maximum gain first, then smallest id.
#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    gain: f64,
    id: usize,
    round: u64,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.id == other.id
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .expect("gains are finite")
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Lazy-greedy candidate queue over stale upper bounds.
///
/// `select_best` returns the same pick as an exhaustive argmax with
/// ascending-id tie-breaking, evaluating only entries whose stale bound
/// still tops the queue. Entries rejected by `feasible` are dropped for
/// good, which is sound when feasibility can only shrink.
pub struct LazyScreener {
    heap: BinaryHeap<QueueEntry>,
    round: u64,
    pub last_eval_count: usize,
}

impl LazyScreener {
    pub fn new(candidates: impl IntoIterator<Item = usize>) -> Self {
        let heap = candidates
            .into_iter()
            .map(|id| QueueEntry {
                gain: f64::INFINITY,
                id,
                round: 0,
            })
            .collect();
        Self {
            heap,
            round: 0,
            last_eval_count: 0,
        }
    }

    pub fn select_best(
        &mut self,
        mut gain: impl FnMut(usize) -> Result<f64, ObjectiveError>,
        mut feasible: impl FnMut(usize) -> bool,
    ) -> Result<Option<(usize, f64)>, ObjectiveError> {
        self.round += 1;
        self.last_eval_count = 0;
        while let Some(top) = self.heap.pop() {
            if !feasible(top.id) {
                continue;
            }
            if top.round == self.round {
                // fresh entries leave the queue on selection
                return Ok(Some((top.id, top.gain)));
            }
            let fresh = gain(top.id)?;
            self.last_eval_count += 1;
            self.heap.push(QueueEntry {
                gain: fresh,
                id: top.id,
                round: self.round,
            });
        }
        Ok(None)
    }
}

/// Exhaustive argmax over candidates: maximum gain, ties to smallest id.
pub fn exhaustive_best(
    state: &EvalState,
    candidates: &[VertexId],
) -> Result<Option<(VertexId, f64)>, ObjectiveError> {
    let mut best: Option<(VertexId, f64)> = None;
    for &v in candidates {
        let gain = state.marginal_gain(v)?;
        best = match best {
            Some((bv, bg)) if bg > gain || (bg == gain && bv < v) => Some((bv, bg)),
            _ => Some((v, gain)),
        };
    }
    Ok(best)
}

#[cfg(feature = "parallel")]
fn parallel_best(
    state: &EvalState,
    candidates: &[VertexId],
) -> Result<Option<(VertexId, f64)>, ObjectiveError> {
    use rayon::prelude::*;
    let gains = candidates
        .par_iter()
        .map(|&v| state.marginal_gain(v).map(|g| (v, g)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(gains.into_iter().fold(None, |best, (v, gain)| match best {
        Some((bv, bg)) if bg > gain || (bg == gain && bv < v) => Some((bv, bg)),
        _ => Some((v, gain)),
    }))
}

/// Vertex-side screener wrapping the chosen strategy.
struct VertexScreener {
    screening: Screening,
    lazy: LazyScreener,
}

impl VertexScreener {
    fn new(g: &ExchangeGraph, screening: Screening) -> Self {
        Self {
            screening,
            lazy: LazyScreener::new(0..g.vertex_count()),
        }
    }

    /// Best unselected vertex whose weight fits `remaining`, with the number
    /// of gain evaluations spent.
    fn next(
        &mut self,
        state: &EvalState,
        remaining: Option<f64>,
    ) -> Result<Option<(VertexId, f64, usize)>, ObjectiveError> {
        let g = state.graph();
        let fits =
            |v: VertexId| remaining.is_none_or(|r| g.weight(v) <= r + 1e-12);
        match self.screening {
            Screening::Lazy => {
                let picked = self.lazy.select_best(
                    |v| state.marginal_gain(v),
                    |v| !state.is_selected(v) && fits(v),
                )?;
                Ok(picked.map(|(v, gain)| (v, gain, self.lazy.last_eval_count)))
            }
            Screening::Exhaustive => {
                let candidates: Vec<VertexId> = (0..g.vertex_count())
                    .filter(|&v| !state.is_selected(v) && fits(v))
                    .collect();
                let evals = candidates.len();
                Ok(exhaustive_best(state, &candidates)?.map(|(v, gain)| (v, gain, evals)))
            }
            #[cfg(feature = "parallel")]
            Screening::Parallel => {
                let candidates: Vec<VertexId> = (0..g.vertex_count())
                    .filter(|&v| !state.is_selected(v) && fits(v))
                    .collect();
                let evals = candidates.len();
                Ok(parallel_best(state, &candidates)?.map(|(v, gain)| (v, gain, evals)))
            }
        }
    }
}

/// Greedy under a cardinality budget with cover recomputation.
///
/// Requires unit vertex weights. `b` broadcasts buy `b` greedy rounds; each
/// time the budget is exhausted, the covered loop closures are re-covered
/// and any saving is reinvested into further rounds. Zero-gain vertices are
/// still picked while budget remains, keeping the round count fixed.
pub fn vertex_greedy_uniform(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: usize,
    opts: &GreedyOptions,
) -> Result<PlanResult, GreedyError> {
    for v in g.vertices() {
        if v.weight != 1.0 {
            return Err(GreedyError::NonUniformWeights(v.id, v.weight));
        }
    }
    let mut state = EvalState::new(g, spec)?;
    let mut screener = VertexScreener::new(g, opts.screening);
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut evals_per_round = Vec::new();
    let mut cost = 0usize;
    let mut picks = 0usize;
    let mut cover = CoverResult {
        cover: VertexSet::new(),
        value: 0.0,
        exact: true,
        lp_value: 0.0,
    };
    let mut v_prev;
    let mut c_prev;
    let mut exhausted = false;

    loop {
        v_prev = state.selected_vertices();
        c_prev = cover.clone();
        while cost < b {
            match screener.next(&state, None)? {
                Some((v, gain, evals)) => {
                    state.commit(v)?;
                    cost += 1;
                    picks += 1;
                    evals_per_round.push(evals);
                    trace.push(TraceStep {
                        round: picks,
                        pick: Pick::Vertex(v),
                        gain,
                        cost: cost as f64,
                        value: state.value(),
                    });
                }
                None => {
                    exhausted = true;
                    break;
                }
            }
        }
        let covered = state.covered_edges();
        cover = apx_vertex_cover(g, &covered);
        if opts.recompute_cover {
            cost = cost.min(cover.value.round() as usize);
        }
        if cost >= b || exhausted || !opts.recompute_cover {
            break;
        }
    }

    // final assembly: previous round's cover plus the latest picks
    let selected = state.selected_vertices();
    let v_new = VertexSet::from_ids(selected.iter().filter(|&v| !v_prev.contains(v)));
    let v_grd = c_prev.cover.union(&v_new);
    let l_grd = g.edges_of(&v_grd)?;
    let value = spec.eval_edges(g, &l_grd)?;
    let cover = attach_cover(g, &v_grd, &l_grd)?;
    Ok(PlanResult {
        algo: "greedy".into(),
        trace,
        cost: v_grd.iter().map(|v| g.weight(v)).sum(),
        v_grd,
        l_grd,
        value,
        cover,
        extra_rounds: picks.saturating_sub(b),
        evals_per_round,
    })
}

/// Knapsack greedy: runs a plain-gain pass and a gain-per-weight pass under
/// `sum w(v) <= b` and returns the better plan.
pub fn cost_benefit_greedy(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    opts: &GreedyOptions,
) -> Result<PlanResult, GreedyError> {
    let plain = knapsack_pass(g, spec, b, opts, false)?;
    let ratio = knapsack_pass(g, spec, b, opts, true)?;
    let mut best = if ratio.value > plain.value { ratio } else { plain };
    best.algo = "cbgreedy".into();
    Ok(best)
}

fn knapsack_pass(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    opts: &GreedyOptions,
    normalize_by_weight: bool,
) -> Result<PlanResult, GreedyError> {
    let mut state = EvalState::new(g, spec)?;
    let mut lazy = LazyScreener::new(0..g.vertex_count());
    let mut trace = Vec::new();
    let mut evals_per_round = Vec::new();
    let mut remaining = b;
    let mut round = 0usize;
    loop {
        let fits = |v: VertexId| !state.is_selected(v) && g.weight(v) <= remaining + 1e-12;
        let picked = match opts.screening {
            Screening::Lazy => {
                let got = lazy.select_best(
                    |v| {
                        let gain = state.marginal_gain(v)?;
                        Ok(if normalize_by_weight {
                            gain / g.weight(v)
                        } else {
                            gain
                        })
                    },
                    fits,
                )?;
                evals_per_round.push(lazy.last_eval_count);
                got.map(|(v, _)| v)
            }
            _ => {
                let candidates: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| fits(v)).collect();
                evals_per_round.push(candidates.len());
                let mut best: Option<(VertexId, f64)> = None;
                for &v in &candidates {
                    let mut gain = state.marginal_gain(v)?;
                    if normalize_by_weight {
                        gain /= g.weight(v);
                    }
                    best = match best {
                        Some((bv, bg)) if bg > gain || (bg == gain && bv < v) => Some((bv, bg)),
                        _ => Some((v, gain)),
                    };
                }
                best.map(|(v, _)| v)
            }
        };
        let Some(v) = picked else { break };
        let gain = state.commit(v)?;
        remaining -= g.weight(v);
        round += 1;
        trace.push(TraceStep {
            round,
            pick: Pick::Vertex(v),
            gain,
            cost: b - remaining,
            value: state.value(),
        });
    }
    let v_grd = state.selected_vertices();
    let l_grd = state.covered_edges();
    let value = spec.eval_edges(g, &l_grd)?;
    let cover = attach_cover(g, &v_grd, &l_grd)?;
    Ok(PlanResult {
        algo: String::new(),
        trace,
        cost: v_grd.iter().map(|v| g.weight(v)).sum(),
        v_grd,
        l_grd,
        value,
        cover,
        extra_rounds: 0,
        evals_per_round,
    })
}

/// Baseline: greedily add the loop closure with the highest edge gain while
/// its verification stays budget-feasible (checked through the cover
/// dispatcher, hence conservative on 3+ robot classes), then harvest all
/// communication-free edges incident to the final cover.
pub fn edge_greedy_baseline(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
) -> Result<PlanResult, GreedyError> {
    let mut state = EvalState::new(g, spec)?;
    let mut lazy = LazyScreener::new(0..g.edge_count());
    let mut rejected = vec![false; g.edge_count()];
    let mut cover = CoverResult {
        cover: VertexSet::new(),
        value: 0.0,
        exact: true,
        lp_value: 0.0,
    };
    let mut trace = Vec::new();
    let mut evals_per_round = Vec::new();
    let mut round = 0usize;
    loop {
        let picked = lazy.select_best(
            |e| Ok(state.edge_gain(e)),
            |e| !rejected[e] && !state.is_covered(e),
        )?;
        evals_per_round.push(lazy.last_eval_count);
        let Some((e, _)) = picked else { break };
        let mut tentative = state.covered_edges();
        tentative.insert(e);
        let tentative_cover = apx_vertex_cover(g, &tentative);
        if tentative_cover.value <= b + 1e-9 {
            let gain = state.commit_edge(e)?;
            cover = tentative_cover;
            round += 1;
            trace.push(TraceStep {
                round,
                pick: Pick::Edge(e),
                gain,
                cost: cover.value,
                value: state.value(),
            });
        } else {
            rejected[e] = true;
        }
    }
    // communication-free augmentation: edges already incident to the cover
    for e in g.edges() {
        if !state.is_covered(e.id) && (cover.cover.contains(e.u) || cover.cover.contains(e.v)) {
            state.commit_edge(e.id)?;
        }
    }
    let l_grd = state.covered_edges();
    debug_assert!(is_cover(g, &cover.cover, &l_grd)?);
    let value = spec.eval_edges(g, &l_grd)?;
    Ok(PlanResult {
        algo: "edge".into(),
        trace,
        v_grd: cover.cover.clone(),
        l_grd,
        value,
        cost: cover.value,
        cover,
        extra_rounds: 0,
        evals_per_round,
    })
}

/// Baseline: a seeded random budget-feasible broadcast set plus everything
/// it can verify.
pub fn random_baseline(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    seed: u64,
) -> Result<PlanResult, GreedyError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut order: Vec<VertexId> = (0..g.vertex_count()).collect();
    order.shuffle(&mut rng);
    let mut state = EvalState::new(g, spec)?;
    let mut remaining = b;
    let mut trace = Vec::new();
    let mut round = 0usize;
    for v in order {
        if g.weight(v) <= remaining + 1e-12 {
            let gain = state.commit(v)?;
            remaining -= g.weight(v);
            round += 1;
            trace.push(TraceStep {
                round,
                pick: Pick::Vertex(v),
                gain,
                cost: b - remaining,
                value: state.value(),
            });
        }
    }
    let v_grd = state.selected_vertices();
    let l_grd = state.covered_edges();
    let value = spec.eval_edges(g, &l_grd)?;
    let cover = attach_cover(g, &v_grd, &l_grd)?;
    Ok(PlanResult {
        algo: "random".into(),
        trace,
        cost: v_grd.iter().map(|v| g.weight(v)).sum(),
        v_grd,
        l_grd,
        value,
        cover,
        extra_rounds: 0,
        evals_per_round: Vec::new(),
    })
}
