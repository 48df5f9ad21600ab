//! The three normalized monotone submodular (NMS) edge objectives, their
//! vertex-side lift, and incremental marginal-gain evaluation.
//!
//! * `NLC`: expected number of true loop closures, the sum of edge
//!   probabilities.
//! * `FIM`: expected gain in the D-criterion,
//!   `logdet(I_init + sum p(e) I_e) - logdet(I_init)`.
//! * `WST`: tree connectivity, `Phi(E) - Phi(0)` with
//!   `Phi(E) = 2 log E[t_wp] + log E[t_wtheta]`; under independent Bernoulli
//!   edges the expected spanning-tree weight equals the deterministic count
//!   with each candidate weight scaled by `p(e)`, so both terms are reduced
//!   log-determinants.
//!
//! The vertex objective is `f_v(V) = f_e(edges_of(V))`. All values are in
//! nats. [`EvalState`] supports O(d^2)-per-candidate gain queries against a
//! frozen Cholesky factor (safe to screen concurrently) and rank-one commits.

use crate::graph::{EdgeId, EdgeSet, ExchangeGraph, GraphError, VertexId, VertexSet};
use crate::posegraph::{EdgeKind, PoseGraph2D, PoseGraphError, ScatteredFactor};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ridge added to the diagonal of `I_init` so its log-determinant is finite.
const INIT_RIDGE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("objective {0:?} requires a pose-graph context")]
    MissingContext(ObjectiveKind),
    #[error("exchange edge {0} is not mapped to a candidate pose-graph edge")]
    UnmappedEdge(EdgeId),
    #[error("matrix factorization failed (information or Laplacian not positive definite)")]
    FactorizationFailure,
    #[error("vertex {0} is already selected")]
    AlreadySelected(VertexId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    PoseGraph(#[from] PoseGraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Nlc,
    Wst,
    Fim,
}

impl std::str::FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nlc" => Ok(Self::Nlc),
            "wst" => Ok(Self::Wst),
            "fim" => Ok(Self::Fim),
            other => Err(format!("unknown objective `{other}` (use nlc|wst|fim)")),
        }
    }
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Nlc => "nlc",
            Self::Wst => "wst",
            Self::Fim => "fim",
        })
    }
}

/// D-criterion context: the anchored initial information matrix and, per
/// exchange edge, a rank factor `U_e` with `p(e) * I_e = U_e * U_e^T`.
struct FimContext {
    dim: usize,
    i_init: DMatrix<f64>,
    logdet_init: f64,
    factors: Vec<ScatteredFactor>,
}

/// Tree-connectivity context: reduced Laplacians of the pre-rendezvous graph
/// under translational / rotational precisions and, per exchange edge, the
/// incidence column scaled by `sqrt(p * w)`.
struct WstContext {
    dim: usize,
    lap_p_init: DMatrix<f64>,
    lap_th_init: DMatrix<f64>,
    logdet_p_init: f64,
    logdet_th_init: f64,
    cols: Vec<WstColumn>,
}

#[derive(Debug, Clone, Copy)]
struct WstColumn {
    i: Option<usize>,
    j: Option<usize>,
    val_p: f64,
    val_th: f64,
}

/// Which objective to maximize, with the estimation context it needs.
pub struct ObjectiveSpec {
    kind: ObjectiveKind,
    fim: Option<FimContext>,
    wst: Option<WstContext>,
}

fn chol_logdet(ch: &Cholesky<f64, Dyn>) -> f64 {
    let l = ch.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}

/// Maps each exchange edge to its candidate pose edge id, validating the
/// mapping exists and points at a candidate.
fn candidate_map(g: &ExchangeGraph, pg: &PoseGraph2D) -> Result<Vec<usize>, ObjectiveError> {
    g.edges()
        .iter()
        .map(|e| {
            let pid = e.pg_edge.ok_or(ObjectiveError::UnmappedEdge(e.id))?;
            let pedge = pg
                .edge(pid)
                .map_err(|_| ObjectiveError::UnmappedEdge(e.id))?;
            if pedge.kind != EdgeKind::Candidate {
                return Err(ObjectiveError::UnmappedEdge(e.id));
            }
            Ok(pid)
        })
        .collect()
}

impl ObjectiveSpec {
    pub fn nlc() -> Self {
        Self {
            kind: ObjectiveKind::Nlc,
            fim: None,
            wst: None,
        }
    }

    pub fn fim(g: &ExchangeGraph, pg: &PoseGraph2D) -> Result<Self, ObjectiveError> {
        let map = candidate_map(g, pg)?;
        let dim = pg.state_dim();
        let mut i_init = DMatrix::identity(dim, dim) * INIT_RIDGE;
        for eid in pg.init_edges() {
            pg.information_matrix(eid)?.add_to(&mut i_init);
        }
        let logdet_init = Cholesky::new(i_init.clone())
            .map(|c| chol_logdet(&c))
            .ok_or(ObjectiveError::FactorizationFailure)?;
        let factors = g
            .edges()
            .iter()
            .map(|e| {
                let mut f = pg.information_factor(map[e.id])?;
                f.cols *= e.p.sqrt();
                Ok(f)
            })
            .collect::<Result<Vec<_>, ObjectiveError>>()?;
        Ok(Self {
            kind: ObjectiveKind::Fim,
            fim: Some(FimContext {
                dim,
                i_init,
                logdet_init,
                factors,
            }),
            wst: None,
        })
    }

    pub fn wst(g: &ExchangeGraph, pg: &PoseGraph2D) -> Result<Self, ObjectiveError> {
        let map = candidate_map(g, pg)?;
        let dim = pg.laplacian_dim();
        let mut w_p = vec![0.0; pg.edges().len()];
        let mut w_th = vec![0.0; pg.edges().len()];
        for e in pg.edges() {
            let prec = pg.edge_precisions(e.id)?;
            w_p[e.id] = prec.w_p;
            w_th[e.id] = prec.w_theta;
        }
        let lap_p_init = pg.reduced_laplacian(&w_p, &EdgeSet::new());
        let lap_th_init = pg.reduced_laplacian(&w_th, &EdgeSet::new());
        let logdet_p_init = Cholesky::new(lap_p_init.clone())
            .map(|c| chol_logdet(&c))
            .ok_or(ObjectiveError::PoseGraph(PoseGraphError::DisconnectedInit))?;
        let logdet_th_init = Cholesky::new(lap_th_init.clone())
            .map(|c| chol_logdet(&c))
            .ok_or(ObjectiveError::PoseGraph(PoseGraphError::DisconnectedInit))?;
        let cols = g
            .edges()
            .iter()
            .map(|e| {
                let pedge = pg.edge(map[e.id]).expect("validated");
                Ok(WstColumn {
                    i: pg.reduced_pose_index(pedge.i),
                    j: pg.reduced_pose_index(pedge.j),
                    val_p: (e.p * w_p[map[e.id]]).sqrt(),
                    val_th: (e.p * w_th[map[e.id]]).sqrt(),
                })
            })
            .collect::<Result<Vec<_>, ObjectiveError>>()?;
        Ok(Self {
            kind: ObjectiveKind::Wst,
            fim: None,
            wst: Some(WstContext {
                dim,
                lap_p_init,
                lap_th_init,
                logdet_p_init,
                logdet_th_init,
                cols,
            }),
        })
    }

    /// Builds the spec for `kind`, requiring a pose graph for WST/FIM.
    pub fn for_kind(
        kind: ObjectiveKind,
        g: &ExchangeGraph,
        pg: Option<&PoseGraph2D>,
    ) -> Result<Self, ObjectiveError> {
        match kind {
            ObjectiveKind::Nlc => Ok(Self::nlc()),
            ObjectiveKind::Wst => Self::wst(g, pg.ok_or(ObjectiveError::MissingContext(kind))?),
            ObjectiveKind::Fim => Self::fim(g, pg.ok_or(ObjectiveError::MissingContext(kind))?),
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    /// `f_e`: objective value of an edge set, from scratch.
    pub fn eval_edges(&self, g: &ExchangeGraph, es: &EdgeSet) -> Result<f64, ObjectiveError> {
        g.check_edge_set(es)?;
        match self.kind {
            ObjectiveKind::Nlc => Ok(es.iter().map(|e| g.edge(e).p).sum()),
            ObjectiveKind::Fim => {
                let ctx = self.fim.as_ref().unwrap();
                let mut m = ctx.i_init.clone();
                for e in es.iter() {
                    let f = &ctx.factors[e];
                    let block = &f.cols * f.cols.transpose();
                    for (a, &ra) in f.rows.iter().enumerate() {
                        for (b, &rb) in f.rows.iter().enumerate() {
                            m[(ra, rb)] += block[(a, b)];
                        }
                    }
                }
                let ch = Cholesky::new(m).ok_or(ObjectiveError::FactorizationFailure)?;
                Ok(chol_logdet(&ch) - ctx.logdet_init)
            }
            ObjectiveKind::Wst => {
                let ctx = self.wst.as_ref().unwrap();
                let mut lp = ctx.lap_p_init.clone();
                let mut lth = ctx.lap_th_init.clone();
                for e in es.iter() {
                    let c = ctx.cols[e];
                    add_scaled_incidence(&mut lp, c.i, c.j, c.val_p * c.val_p);
                    add_scaled_incidence(&mut lth, c.i, c.j, c.val_th * c.val_th);
                }
                let chp = Cholesky::new(lp).ok_or(ObjectiveError::FactorizationFailure)?;
                let chth = Cholesky::new(lth).ok_or(ObjectiveError::FactorizationFailure)?;
                Ok(2.0 * (chol_logdet(&chp) - ctx.logdet_p_init)
                    + (chol_logdet(&chth) - ctx.logdet_th_init))
            }
        }
    }

    /// `f_v`: the lifted vertex objective, `f_e(edges_of(V))`.
    pub fn eval_vertices(&self, g: &ExchangeGraph, vs: &VertexSet) -> Result<f64, ObjectiveError> {
        let es = g.edges_of(vs)?;
        self.eval_edges(g, &es)
    }

    /// Continuous relaxation `h(l)` over fractional edge indicators together
    /// with its gradient; `h` on 0/1 vectors agrees with `eval_edges` and is
    /// concave (linear for NLC) on `[0,1]^m`.
    pub fn relaxation_value_and_gradient(
        &self,
        g: &ExchangeGraph,
        ell: &[f64],
    ) -> Result<(f64, Vec<f64>), ObjectiveError> {
        assert_eq!(ell.len(), g.edge_count());
        match self.kind {
            ObjectiveKind::Nlc => {
                let value = ell
                    .iter()
                    .zip(g.edges())
                    .map(|(l, e)| l * e.p)
                    .sum();
                Ok((value, g.edges().iter().map(|e| e.p).collect()))
            }
            ObjectiveKind::Fim => {
                let ctx = self.fim.as_ref().unwrap();
                let mut m = ctx.i_init.clone();
                for (e, &l) in g.edges().iter().zip(ell) {
                    if l == 0.0 {
                        continue;
                    }
                    let f = &ctx.factors[e.id];
                    let block = (&f.cols * f.cols.transpose()) * l;
                    for (a, &ra) in f.rows.iter().enumerate() {
                        for (b, &rb) in f.rows.iter().enumerate() {
                            m[(ra, rb)] += block[(a, b)];
                        }
                    }
                }
                let chol = Cholesky::new(m).ok_or(ObjectiveError::FactorizationFailure)?;
                let value = chol_logdet(&chol) - ctx.logdet_init;
                // d h / d l_e = tr(M^{-1} U_e U_e^T)
                let grad = g
                    .edges()
                    .iter()
                    .map(|e| {
                        let f = &ctx.factors[e.id];
                        let mut u = DMatrix::zeros(ctx.dim, f.cols.ncols());
                        for (r, &row) in f.rows.iter().enumerate() {
                            for c in 0..f.cols.ncols() {
                                u[(row, c)] = f.cols[(r, c)];
                            }
                        }
                        let x = chol.solve(&u);
                        (u.transpose() * x).trace()
                    })
                    .collect();
                Ok((value, grad))
            }
            ObjectiveKind::Wst => {
                let ctx = self.wst.as_ref().unwrap();
                let mut lp = ctx.lap_p_init.clone();
                let mut lth = ctx.lap_th_init.clone();
                for (e, &l) in g.edges().iter().zip(ell) {
                    if l == 0.0 {
                        continue;
                    }
                    let c = ctx.cols[e.id];
                    add_scaled_incidence(&mut lp, c.i, c.j, l * c.val_p * c.val_p);
                    add_scaled_incidence(&mut lth, c.i, c.j, l * c.val_th * c.val_th);
                }
                let chp = Cholesky::new(lp).ok_or(ObjectiveError::FactorizationFailure)?;
                let chth = Cholesky::new(lth).ok_or(ObjectiveError::FactorizationFailure)?;
                let value = 2.0 * (chol_logdet(&chp) - ctx.logdet_p_init)
                    + (chol_logdet(&chth) - ctx.logdet_th_init);
                let grad = g
                    .edges()
                    .iter()
                    .map(|e| {
                        let c = ctx.cols[e.id];
                        let mut col_p = DVector::zeros(ctx.dim);
                        let mut col_th = DVector::zeros(ctx.dim);
                        if let Some(a) = c.i {
                            col_p[a] = c.val_p;
                            col_th[a] = c.val_th;
                        }
                        if let Some(b) = c.j {
                            col_p[b] -= c.val_p;
                            col_th[b] -= c.val_th;
                        }
                        let xp = chp.solve(&col_p);
                        let xth = chth.solve(&col_th);
                        2.0 * col_p.dot(&xp) + col_th.dot(&xth)
                    })
                    .collect();
                Ok((value, grad))
            }
        }
    }
}

fn add_scaled_incidence(l: &mut DMatrix<f64>, i: Option<usize>, j: Option<usize>, w: f64) {
    if let Some(a) = i {
        l[(a, a)] += w;
    }
    if let Some(b) = j {
        l[(b, b)] += w;
    }
    if let (Some(a), Some(b)) = (i, j) {
        l[(a, b)] -= w;
        l[(b, a)] -= w;
    }
}

enum Numeric {
    Nlc,
    Fim {
        chol: Cholesky<f64, Dyn>,
    },
    Wst {
        chol_p: Cholesky<f64, Dyn>,
        chol_th: Cholesky<f64, Dyn>,
    },
}

/// Incremental evaluation state for one planning run.
///
/// `marginal_gain` and `edge_gain` are read-only against the frozen
/// factorization and may be called concurrently; `commit*` mutates it with
/// rank-one updates (falling back to a full refactorization when an update
/// degenerates).
pub struct EvalState<'a> {
    g: &'a ExchangeGraph,
    spec: &'a ObjectiveSpec,
    selected: Vec<bool>,
    covered: Vec<bool>,
    n_selected: usize,
    value: f64,
    numeric: Numeric,
}

impl<'a> EvalState<'a> {
    pub fn new(g: &'a ExchangeGraph, spec: &'a ObjectiveSpec) -> Result<Self, ObjectiveError> {
        let numeric = match spec.kind {
            ObjectiveKind::Nlc => Numeric::Nlc,
            ObjectiveKind::Fim => {
                let ctx = spec
                    .fim
                    .as_ref()
                    .ok_or(ObjectiveError::MissingContext(spec.kind))?;
                if ctx.factors.len() != g.edge_count() {
                    return Err(ObjectiveError::MissingContext(spec.kind));
                }
                Numeric::Fim {
                    chol: Cholesky::new(ctx.i_init.clone())
                        .ok_or(ObjectiveError::FactorizationFailure)?,
                }
            }
            ObjectiveKind::Wst => {
                let ctx = spec
                    .wst
                    .as_ref()
                    .ok_or(ObjectiveError::MissingContext(spec.kind))?;
                if ctx.cols.len() != g.edge_count() {
                    return Err(ObjectiveError::MissingContext(spec.kind));
                }
                Numeric::Wst {
                    chol_p: Cholesky::new(ctx.lap_p_init.clone())
                        .ok_or(ObjectiveError::FactorizationFailure)?,
                    chol_th: Cholesky::new(ctx.lap_th_init.clone())
                        .ok_or(ObjectiveError::FactorizationFailure)?,
                }
            }
        };
        Ok(Self {
            g,
            spec,
            selected: vec![false; g.vertex_count()],
            covered: vec![false; g.edge_count()],
            n_selected: 0,
            value: 0.0,
            numeric,
        })
    }

    pub fn graph(&self) -> &ExchangeGraph {
        self.g
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_selected(&self, v: VertexId) -> bool {
        self.selected[v]
    }

    pub fn selected_count(&self) -> usize {
        self.n_selected
    }

    pub fn is_covered(&self, e: EdgeId) -> bool {
        self.covered[e]
    }

    pub fn selected_vertices(&self) -> VertexSet {
        VertexSet::from_ids((0..self.selected.len()).filter(|&v| self.selected[v]))
    }

    pub fn covered_edges(&self) -> EdgeSet {
        EdgeSet::from_ids((0..self.covered.len()).filter(|&e| self.covered[e]))
    }

    /// Edges that selecting `v` would newly cover, ascending.
    pub fn new_edges_for(&self, v: VertexId) -> Vec<EdgeId> {
        self.g
            .incident_edges(v)
            .iter()
            .copied()
            .filter(|&e| !self.covered[e])
            .collect()
    }

    /// `f_v(V + v) - f_v(V)` against the frozen state.
    pub fn marginal_gain(&self, v: VertexId) -> Result<f64, ObjectiveError> {
        if self.selected[v] {
            return Err(ObjectiveError::AlreadySelected(v));
        }
        Ok(self.gain_for_edges(&self.new_edges_for(v)))
    }

    /// `f_e(E + e) - f_e(E)` against the frozen state; zero if covered.
    pub fn edge_gain(&self, e: EdgeId) -> f64 {
        if self.covered[e] {
            0.0
        } else {
            self.gain_for_edges(&[e])
        }
    }

    /// Joint gain of covering `edges` (must be uncovered, deduplicated).
    fn gain_for_edges(&self, edges: &[EdgeId]) -> f64 {
        if edges.is_empty() {
            return 0.0;
        }
        match &self.numeric {
            Numeric::Nlc => edges.iter().map(|&e| self.g.edge(e).p).sum(),
            Numeric::Fim { chol } => {
                let ctx = self.spec.fim.as_ref().unwrap();
                let mut u = DMatrix::zeros(ctx.dim, 3 * edges.len());
                for (k, &e) in edges.iter().enumerate() {
                    let f = &ctx.factors[e];
                    for (r, &row) in f.rows.iter().enumerate() {
                        for c in 0..3 {
                            u[(row, 3 * k + c)] = f.cols[(r, c)];
                        }
                    }
                }
                low_rank_logdet_gain(chol, &u)
            }
            Numeric::Wst { chol_p, chol_th } => {
                let ctx = self.spec.wst.as_ref().unwrap();
                let mut up = DMatrix::zeros(ctx.dim, edges.len());
                let mut uth = DMatrix::zeros(ctx.dim, edges.len());
                for (k, &e) in edges.iter().enumerate() {
                    let c = ctx.cols[e];
                    if let Some(a) = c.i {
                        up[(a, k)] = c.val_p;
                        uth[(a, k)] = c.val_th;
                    }
                    if let Some(b) = c.j {
                        up[(b, k)] -= c.val_p;
                        uth[(b, k)] -= c.val_th;
                    }
                }
                2.0 * low_rank_logdet_gain(chol_p, &up) + low_rank_logdet_gain(chol_th, &uth)
            }
        }
    }

    /// Selects `v`, covering its incident edges. Returns the realized gain.
    pub fn commit(&mut self, v: VertexId) -> Result<f64, ObjectiveError> {
        if self.selected[v] {
            return Err(ObjectiveError::AlreadySelected(v));
        }
        let new_edges = self.new_edges_for(v);
        let gain = self.gain_for_edges(&new_edges);
        self.apply_edges(&new_edges)?;
        self.selected[v] = true;
        self.n_selected += 1;
        self.value += gain;
        Ok(gain)
    }

    /// Adds a single edge to the covered set. Returns the realized gain.
    pub fn commit_edge(&mut self, e: EdgeId) -> Result<f64, ObjectiveError> {
        if self.covered[e] {
            return Ok(0.0);
        }
        let gain = self.gain_for_edges(&[e]);
        self.apply_edges(&[e])?;
        self.value += gain;
        Ok(gain)
    }

    fn apply_edges(&mut self, edges: &[EdgeId]) -> Result<(), ObjectiveError> {
        let ok = self.update_factors(edges);
        for &e in edges {
            self.covered[e] = true;
        }
        if !ok {
            self.refactorize()?;
        }
        Ok(())
    }

    /// Rank-one updates for the newly covered edges; false when the factor
    /// degenerated and a refactorization is needed.
    fn update_factors(&mut self, edges: &[EdgeId]) -> bool {
        match &mut self.numeric {
            Numeric::Nlc => true,
            Numeric::Fim { chol } => {
                let ctx = self.spec.fim.as_ref().unwrap();
                for &e in edges {
                    let f = &ctx.factors[e];
                    for c in 0..3 {
                        let mut col = DVector::zeros(ctx.dim);
                        for (r, &row) in f.rows.iter().enumerate() {
                            col[row] = f.cols[(r, c)];
                        }
                        chol.rank_one_update(&col, 1.0);
                    }
                }
                factor_is_finite(chol)
            }
            Numeric::Wst { chol_p, chol_th } => {
                let ctx = self.spec.wst.as_ref().unwrap();
                for &e in edges {
                    let c = ctx.cols[e];
                    let mut col = DVector::zeros(ctx.dim);
                    if let Some(a) = c.i {
                        col[a] = c.val_p;
                    }
                    if let Some(b) = c.j {
                        col[b] = -c.val_p;
                    }
                    chol_p.rank_one_update(&col, 1.0);
                    let mut col = DVector::zeros(ctx.dim);
                    if let Some(a) = c.i {
                        col[a] = c.val_th;
                    }
                    if let Some(b) = c.j {
                        col[b] = -c.val_th;
                    }
                    chol_th.rank_one_update(&col, 1.0);
                }
                factor_is_finite(chol_p) && factor_is_finite(chol_th)
            }
        }
    }

    /// Full refactorization from the covered edge set.
    fn refactorize(&mut self) -> Result<(), ObjectiveError> {
        let covered = self.covered_edges();
        match self.spec.kind {
            ObjectiveKind::Nlc => Ok(()),
            ObjectiveKind::Fim => {
                let ctx = self.spec.fim.as_ref().unwrap();
                let mut m = ctx.i_init.clone();
                for e in covered.iter() {
                    let f = &ctx.factors[e];
                    let block = &f.cols * f.cols.transpose();
                    for (a, &ra) in f.rows.iter().enumerate() {
                        for (b, &rb) in f.rows.iter().enumerate() {
                            m[(ra, rb)] += block[(a, b)];
                        }
                    }
                }
                self.numeric = Numeric::Fim {
                    chol: Cholesky::new(m).ok_or(ObjectiveError::FactorizationFailure)?,
                };
                Ok(())
            }
            ObjectiveKind::Wst => {
                let ctx = self.spec.wst.as_ref().unwrap();
                let mut lp = ctx.lap_p_init.clone();
                let mut lth = ctx.lap_th_init.clone();
                for e in covered.iter() {
                    let c = ctx.cols[e];
                    add_scaled_incidence(&mut lp, c.i, c.j, c.val_p * c.val_p);
                    add_scaled_incidence(&mut lth, c.i, c.j, c.val_th * c.val_th);
                }
                self.numeric = Numeric::Wst {
                    chol_p: Cholesky::new(lp).ok_or(ObjectiveError::FactorizationFailure)?,
                    chol_th: Cholesky::new(lth).ok_or(ObjectiveError::FactorizationFailure)?,
                };
                Ok(())
            }
        }
    }
}

fn factor_is_finite(ch: &Cholesky<f64, Dyn>) -> bool {
    let l = ch.l_dirty();
    (0..l.nrows()).all(|i| l[(i, i)].is_finite() && l[(i, i)] > 0.0)
}

/// Matrix determinant lemma: `logdet(A + U U^T) - logdet(A)` computed as
/// `logdet(I + U^T A^{-1} U)` with the cached factor of `A`.
fn low_rank_logdet_gain(chol: &Cholesky<f64, Dyn>, u: &DMatrix<f64>) -> f64 {
    let x = chol.solve(u);
    let k = u.ncols();
    let small = DMatrix::identity(k, k) + u.transpose() * x;
    match Cholesky::new(small) {
        Some(ch) => chol_logdet(&ch),
        // I + U^T A^{-1} U is PD for PD A; reaching here means severe
        // ill-conditioning, report a zero gain rather than poisoning the run
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge as XEdge, Vertex as XVertex};
    use crate::posegraph::{attach_chain_context, EdgeKind, PgEdge, Pose};
    use approx::assert_relative_eq;

    fn three_robot_example(p: f64) -> ExchangeGraph {
        let vertices = (0..9)
            .map(|id| XVertex {
                id,
                robot: id / 3,
                weight: 1.0,
            })
            .collect();
        let pairs = [
            (0, 4),
            (1, 3),
            (1, 7),
            (1, 8),
            (4, 6),
            (1, 6),
            (4, 2),
            (5, 6),
        ];
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(id, &(u, v))| XEdge {
                id,
                u,
                v,
                p,
                pg_edge: None,
            })
            .collect();
        ExchangeGraph::new(vertices, edges, 3).unwrap()
    }

    fn unit_pose_edge(id: usize, i: usize, j: usize, kind: EdgeKind, p: Option<f64>) -> PgEdge {
        PgEdge {
            id,
            i,
            j,
            dx: 1.0,
            dy: 0.0,
            dtheta: 0.0,
            info: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            kind,
            p,
        }
    }

    /// 3-pose path with one candidate closing the triangle; exchange graph
    /// has the two endpoint observations and one edge mapped to it.
    fn triangle_instance(p: f64) -> (PoseGraph2D, ExchangeGraph) {
        let poses = (0..3)
            .map(|id| Pose {
                id,
                x: id as f64,
                y: 0.0,
                theta: 0.0,
            })
            .collect();
        let edges = vec![
            unit_pose_edge(0, 0, 1, EdgeKind::Odometry, None),
            unit_pose_edge(1, 1, 2, EdgeKind::Odometry, None),
            unit_pose_edge(2, 0, 2, EdgeKind::Candidate, Some(p)),
        ];
        let pg = PoseGraph2D::new(poses, edges, 0).unwrap();
        let vertices = vec![
            XVertex {
                id: 0,
                robot: 0,
                weight: 1.0,
            },
            XVertex {
                id: 1,
                robot: 1,
                weight: 1.0,
            },
        ];
        let xedges = vec![XEdge {
            id: 0,
            u: 0,
            v: 1,
            p,
            pg_edge: Some(2),
        }];
        let xg = ExchangeGraph::new(vertices, xedges, 2).unwrap();
        (pg, xg)
    }

    #[test]
    fn nlc_values() {
        let g = three_robot_example(0.5);
        let spec = ObjectiveSpec::nlc();
        assert_eq!(spec.eval_edges(&g, &EdgeSet::new()).unwrap(), 0.0);
        let three = EdgeSet::from_ids([0, 1, 2]);
        assert_relative_eq!(spec.eval_edges(&g, &three).unwrap(), 1.5);
        // edges_of({a2}) covers 4 edges at p = 0.5
        let v = VertexSet::from_ids([1]);
        assert_relative_eq!(spec.eval_vertices(&g, &v).unwrap(), 2.0);
        // edges_of({a2, b2}) covers 7 edges
        let v = VertexSet::from_ids([1, 4]);
        assert_relative_eq!(spec.eval_vertices(&g, &v).unwrap(), 3.5);
    }

    #[test]
    fn vertex_objective_zero_on_empty_for_all_kinds() {
        let g = three_robot_example(0.5);
        let (pg, xg) = attach_chain_context(&g, 0.05, 0.02, 3).unwrap();
        for kind in [ObjectiveKind::Nlc, ObjectiveKind::Wst, ObjectiveKind::Fim] {
            let spec = ObjectiveSpec::for_kind(kind, &xg, Some(&pg)).unwrap();
            assert_eq!(spec.eval_vertices(&xg, &VertexSet::new()).unwrap(), 0.0);
        }
    }

    #[test]
    fn wst_triangle_is_three_ln_three() {
        let (pg, xg) = triangle_instance(1.0);
        let spec = ObjectiveSpec::wst(&xg, &pg).unwrap();
        let f = spec.eval_edges(&xg, &xg.all_edges()).unwrap();
        assert_relative_eq!(f, 3.0 * 3.0f64.ln(), epsilon = 1e-9);
        assert_eq!(spec.eval_edges(&xg, &EdgeSet::new()).unwrap(), 0.0);
    }

    #[test]
    fn wst_triangle_scaled_by_probability() {
        // expected tree count 1*1 + 0.5 + 0.5 = 2 under p = 0.5
        let (pg, xg) = triangle_instance(0.5);
        let spec = ObjectiveSpec::wst(&xg, &pg).unwrap();
        let f = spec.eval_edges(&xg, &xg.all_edges()).unwrap();
        assert_relative_eq!(f, 3.0 * 2.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn fim_identity_analytic() {
        // hand-built context: I_init = I_d, one edge with p * I_e = I_d
        let d = 5;
        let ctx = FimContext {
            dim: d,
            i_init: DMatrix::identity(d, d),
            logdet_init: 0.0,
            factors: vec![ScatteredFactor {
                rows: (0..d).collect(),
                cols: DMatrix::identity(d, d),
            }],
        };
        let spec = ObjectiveSpec {
            kind: ObjectiveKind::Fim,
            fim: Some(ctx),
            wst: None,
        };
        let vertices = vec![
            XVertex {
                id: 0,
                robot: 0,
                weight: 1.0,
            },
            XVertex {
                id: 1,
                robot: 1,
                weight: 1.0,
            },
        ];
        let edges = vec![XEdge {
            id: 0,
            u: 0,
            v: 1,
            p: 1.0,
            pg_edge: None,
        }];
        let g = ExchangeGraph::new(vertices, edges, 2).unwrap();
        let f = spec.eval_edges(&g, &g.all_edges()).unwrap();
        assert_relative_eq!(f, d as f64 * 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn fim_matches_eigendecomposition_oracle() {
        let g = three_robot_example(0.7);
        let (pg, xg) = attach_chain_context(&g, 0.1, 0.05, 11).unwrap();
        let spec = ObjectiveSpec::fim(&xg, &pg).unwrap();
        let ctx = spec.fim.as_ref().unwrap();
        for es in [
            EdgeSet::from_ids([0]),
            EdgeSet::from_ids([0, 3, 5]),
            xg.all_edges(),
        ] {
            let got = spec.eval_edges(&xg, &es).unwrap();
            // independent route: sum of log eigenvalues
            let mut m = ctx.i_init.clone();
            for e in es.iter() {
                let f = &ctx.factors[e];
                let block = &f.cols * f.cols.transpose();
                for (a, &ra) in f.rows.iter().enumerate() {
                    for (b, &rb) in f.rows.iter().enumerate() {
                        m[(ra, rb)] += block[(a, b)];
                    }
                }
            }
            let logdet: f64 = m.symmetric_eigenvalues().iter().map(|v| v.ln()).sum();
            let init: f64 = ctx
                .i_init
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .map(|v| v.ln())
                .sum();
            assert_relative_eq!(got, logdet - init, epsilon = 1e-8);
        }
    }

    #[test]
    fn marginal_gain_matches_from_scratch() {
        let g = three_robot_example(0.6);
        let (pg, xg) = attach_chain_context(&g, 0.08, 0.03, 5).unwrap();
        for kind in [ObjectiveKind::Nlc, ObjectiveKind::Wst, ObjectiveKind::Fim] {
            let spec = ObjectiveSpec::for_kind(kind, &xg, Some(&pg)).unwrap();
            let mut state = EvalState::new(&xg, &spec).unwrap();
            let mut selected = VertexSet::new();
            for v in [1usize, 4, 6, 0] {
                let before = spec.eval_vertices(&xg, &selected).unwrap();
                let mut with = selected.clone();
                with.insert(v);
                let after = spec.eval_vertices(&xg, &with).unwrap();
                let gain = state.marginal_gain(v).unwrap();
                let scale = after.abs().max(1.0);
                assert!(
                    (gain - (after - before)).abs() / scale < 1e-8,
                    "{kind}: incremental {gain} vs batch {}",
                    after - before
                );
                let realized = state.commit(v).unwrap();
                assert_relative_eq!(realized, gain, epsilon = 1e-12);
                selected = with;
                let scale = state.value().abs().max(1.0);
                assert!((state.value() - after).abs() / scale < 1e-8);
            }
        }
    }

    #[test]
    fn gain_zero_for_degree_zero_and_covered() {
        let g = three_robot_example(0.5);
        let spec = ObjectiveSpec::nlc();
        let mut state = EvalState::new(&g, &spec).unwrap();
        state.commit(1).unwrap(); // a2 covers edges 1,2,3,5
        state.commit(4).unwrap(); // b2 covers edges 0,4,6
        // c2 (id 7) has only edge a2-c2, already covered
        assert_eq!(state.marginal_gain(7).unwrap(), 0.0);
        assert!(state.marginal_gain(1).is_err());
        // nlc three_robot_example example: state {a2}, adding b2 gains 3 new edges * 0.5
        let mut fresh = EvalState::new(&g, &spec).unwrap();
        fresh.commit(1).unwrap();
        assert_relative_eq!(fresh.marginal_gain(4).unwrap(), 1.5);
    }

    #[test]
    fn edge_gain_and_commit_edge() {
        let (pg, xg) = triangle_instance(1.0);
        let spec = ObjectiveSpec::wst(&xg, &pg).unwrap();
        let mut state = EvalState::new(&xg, &spec).unwrap();
        let gain = state.edge_gain(0);
        assert_relative_eq!(gain, 3.0 * 3.0f64.ln(), epsilon = 1e-9);
        let realized = state.commit_edge(0).unwrap();
        assert_relative_eq!(realized, gain, epsilon = 1e-12);
        assert_eq!(state.edge_gain(0), 0.0);
        assert_eq!(state.commit_edge(0).unwrap(), 0.0);
    }

    #[test]
    fn missing_context_is_reported() {
        let g = three_robot_example(0.5);
        assert!(matches!(
            ObjectiveSpec::for_kind(ObjectiveKind::Wst, &g, None),
            Err(ObjectiveError::MissingContext(ObjectiveKind::Wst))
        ));
        // three_robot_example has no pg_edge mapping: building a context must fail
        let (pg, _) = triangle_instance(1.0);
        assert!(matches!(
            ObjectiveSpec::fim(&g, &pg),
            Err(ObjectiveError::UnmappedEdge(0))
        ));
    }

    #[test]
    fn nms_axioms_spot_check() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        let g = three_robot_example(0.4);
        let (pg, xg) = attach_chain_context(&g, 0.1, 0.04, 2).unwrap();
        for kind in [ObjectiveKind::Nlc, ObjectiveKind::Wst, ObjectiveKind::Fim] {
            let spec = ObjectiveSpec::for_kind(kind, &xg, Some(&pg)).unwrap();
            for _ in 0..60 {
                let a = VertexSet::from_ids((0..9).filter(|_| rng.random::<bool>()));
                let b = VertexSet::from_ids((0..9).filter(|_| rng.random::<bool>()));
                let fa = spec.eval_vertices(&xg, &a).unwrap();
                let fb = spec.eval_vertices(&xg, &b).unwrap();
                let fu = spec.eval_vertices(&xg, &a.union(&b)).unwrap();
                let fi = spec.eval_vertices(&xg, &a.intersection(&b)).unwrap();
                assert!(fa + fb >= fu + fi - 1e-9, "{kind}: submodularity violated");
                assert!(fu >= fa - 1e-9, "{kind}: monotonicity violated");
            }
        }
    }
}
