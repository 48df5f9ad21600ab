//! A posteriori near-optimality certificates.
//!
//! Planners come with worst-case factors, but on a concrete instance a much
//! tighter statement is usually available: an upper bound `UPT >= OPT`
//! turns any achieved value into a certified ratio `achieved / UPT`. Three
//! bound routes are provided:
//!
//! * [`oracle_opt`]: exhaustive search over budget-feasible vertex sets
//!   (tiny instances; `UPT = OPT` exactly),
//! * [`nlc_upper_bound`]: the LP relaxation of the budgeted exchange
//!   problem for the expected-loop-closure objective,
//! * [`smooth_upper_bound`]: Frank-Wolfe on the concave log-det relaxations
//!   (FIM/WST) over the same polytope, reporting the best
//!   value-plus-duality-gap bound.
//!
//! The shared feasible set is
//! `F = {(pi, l) in [0,1]^n x [0,1]^m : w'pi <= b, A'pi >= l}`: `pi` marks
//! broadcast observations, `l` marks verifiable loop closures.

pub mod simplex;

use crate::graph::{ExchangeGraph, VertexId};
use crate::greedy::{cost_benefit_greedy, vertex_greedy_uniform, GreedyError, GreedyOptions};
use crate::objectives::{ObjectiveError, ObjectiveKind, ObjectiveSpec};
use serde::Serialize;
use simplex::{simplex_solve, Cmp, LpProblem, LpStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("instance too large for the exhaustive oracle: {vertices} vertices > cap {cap}")]
    InstanceTooLarge { vertices: usize, cap: usize },
    #[error("LP relaxation failed: {0:?}")]
    LpFailed(LpStatus),
    #[error("objective {0} has no smooth relaxation bound; use the LP for nlc")]
    WrongObjective(ObjectiveKind),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    Oracle,
    Lp,
    FrankWolfe,
}

/// An instance-specific upper bound paired with the value the default
/// planner achieved: `ratio = achieved / upt` certifies near-optimality.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub upt: f64,
    pub method: BoundMethod,
    pub achieved: f64,
    pub ratio: f64,
}

impl Certificate {
    fn new(upt: f64, method: BoundMethod, achieved: f64) -> Self {
        let ratio = if upt.abs() < 1e-12 {
            1.0
        } else {
            achieved / upt
        };
        Certificate {
            upt,
            method,
            achieved,
            ratio,
        }
    }
}

/// Value achieved by the default planner: the uniform-weight greedy when
/// weights are unit, the cost-benefit greedy otherwise.
pub fn default_plan_value(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
) -> Result<f64, GreedyError> {
    let unit = g.vertices().iter().all(|v| v.weight == 1.0);
    if unit {
        let rounds = b.max(0.0).floor() as usize;
        Ok(vertex_greedy_uniform(g, spec, rounds, &GreedyOptions::default())?.value)
    } else {
        Ok(cost_benefit_greedy(g, spec, b, &GreedyOptions::default())?.value)
    }
}

pub const DEFAULT_ORACLE_CAP: usize = 20;

/// Exact optimum by exhaustion over budget-feasible vertex sets; by the
/// equality of the edge- and vertex-side optima this is also the optimum of
/// the edge-selection problem.
pub fn oracle_opt(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    cap: usize,
) -> Result<Certificate, CertifyError> {
    let opt = oracle_opt_value(g, spec, b, cap)?;
    let achieved = default_plan_value(g, spec, b)?;
    Ok(Certificate::new(opt, BoundMethod::Oracle, achieved))
}

/// The raw exhaustive optimum `OPT_v`.
pub fn oracle_opt_value(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    cap: usize,
) -> Result<f64, CertifyError> {
    let m = g.vertex_count();
    if m > cap {
        return Err(CertifyError::InstanceTooLarge { vertices: m, cap });
    }
    // monotone objective: the optimum is attained at a maximal feasible set,
    // so only evaluate sets the DFS cannot extend further
    fn dfs(
        g: &ExchangeGraph,
        spec: &ObjectiveSpec,
        next: VertexId,
        remaining: f64,
        current: &mut Vec<VertexId>,
        best: &mut f64,
    ) -> Result<(), CertifyError> {
        let mut extended = false;
        for v in next..g.vertex_count() {
            if g.weight(v) <= remaining + 1e-12 {
                extended = true;
                current.push(v);
                dfs(g, spec, v + 1, remaining - g.weight(v), current, best)?;
                current.pop();
            }
        }
        if !extended {
            let vs = crate::graph::VertexSet::from_ids(current.iter().copied());
            let value = spec.eval_vertices(g, &vs)?;
            if value > *best {
                *best = value;
            }
        }
        Ok(())
    }
    let mut best = 0.0;
    let mut current = Vec::new();
    dfs(g, spec, 0, b, &mut current, &mut best)?;
    Ok(best)
}

/// Builds the relaxation polytope `F` with a caller-chosen linear objective
/// on the edge indicators (the `pi` block carries zero objective).
fn relaxation_lp(g: &ExchangeGraph, b: f64, ell_objective: &[f64]) -> LpProblem {
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut objective = vec![0.0; n + m];
    objective[n..].copy_from_slice(ell_objective);
    let mut lp = LpProblem::new(objective);
    lp.bounds = vec![(0.0, 1.0); n + m];
    // w' pi <= b
    let mut budget = vec![0.0; n + m];
    for v in g.vertices() {
        budget[v.id] = v.weight;
    }
    lp.constrain(budget, Cmp::Le, b);
    // pi_u + pi_v >= l_e
    for e in g.edges() {
        let mut row = vec![0.0; n + m];
        row[e.u] = 1.0;
        row[e.v] = 1.0;
        row[n + e.id] = -1.0;
        lp.constrain(row, Cmp::Ge, 0.0);
    }
    lp
}

/// LP relaxation bound for the expected number of true loop closures.
pub fn nlc_upper_bound(g: &ExchangeGraph, b: f64) -> Result<Certificate, CertifyError> {
    let spec = ObjectiveSpec::nlc();
    let upt = nlc_upper_bound_value(g, b)?;
    let achieved = default_plan_value(g, &spec, b)?;
    Ok(Certificate::new(upt, BoundMethod::Lp, achieved))
}

/// The raw LP bound value.
pub fn nlc_upper_bound_value(g: &ExchangeGraph, b: f64) -> Result<f64, CertifyError> {
    let p: Vec<f64> = g.edges().iter().map(|e| e.p).collect();
    let sol = simplex_solve(&relaxation_lp(g, b, &p));
    if sol.status != LpStatus::Optimal {
        return Err(CertifyError::LpFailed(sol.status));
    }
    Ok(sol.value)
}

/// Frank-Wolfe bound for the concave FIM/WST relaxations over `F`.
///
/// Each iteration maximizes the gradient linearization over `F` by simplex;
/// `h(l_t) + gap_t` upper-bounds the optimum for every `t`, and the best
/// bound across iterations is reported.
pub fn smooth_upper_bound(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    iters: usize,
) -> Result<Certificate, CertifyError> {
    let upt = smooth_upper_bound_value(g, spec, b, iters)?;
    let achieved = default_plan_value(g, spec, b)?;
    Ok(Certificate::new(upt, BoundMethod::FrankWolfe, achieved))
}

/// The raw Frank-Wolfe bound value.
pub fn smooth_upper_bound_value(
    g: &ExchangeGraph,
    spec: &ObjectiveSpec,
    b: f64,
    iters: usize,
) -> Result<f64, CertifyError> {
    if spec.kind() == ObjectiveKind::Nlc {
        return Err(CertifyError::WrongObjective(spec.kind()));
    }
    let m = g.edge_count();
    let mut ell = vec![0.0; m];
    let mut best = f64::INFINITY;
    for t in 0..iters.max(1) {
        let (h, grad) = spec.relaxation_value_and_gradient(g, &ell)?;
        let sol = simplex_solve(&relaxation_lp(g, b, &grad));
        if sol.status != LpStatus::Optimal {
            return Err(CertifyError::LpFailed(sol.status));
        }
        let s = &sol.x[g.vertex_count()..];
        let gap: f64 = grad
            .iter()
            .zip(s.iter().zip(&ell))
            .map(|(gr, (si, li))| gr * (si - li))
            .sum();
        best = best.min(h + gap.max(0.0));
        if gap <= 1e-9 {
            break;
        }
        let step = 2.0 / (t as f64 + 2.0);
        for (l, &si) in ell.iter_mut().zip(s) {
            *l += step * (si - *l);
        }
    }
    Ok(best)
}
