//! Exchange-graph data model and the vertex-to-edge lift.
//!
//! An exchange graph is a simple undirected n-partite graph: vertices are
//! observations owned by robots (with a positive transmission weight), edges
//! are potential inter-robot loop closures with an occurrence probability in
//! `(0, 1]`. Broadcasting a set of observations `V` lets the team verify
//! every candidate incident to `V`; that lift is [`ExchangeGraph::edges_of`].

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex index, `0..vertex_count`.
pub type VertexId = usize;
/// Dense edge index, `0..edge_count`.
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("duplicate edge between vertices {0} and {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge between vertices {0} and {1} stays within robot {2}")]
    IntraRobotEdge(VertexId, VertexId, usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {0} has non-positive weight {1}")]
    NonpositiveWeight(VertexId, f64),
    #[error("edge ({0},{1}) has probability {2} outside (0, 1]")]
    ProbabilityOutOfRange(VertexId, VertexId, f64),
    #[error("edge references unknown vertex id {0}")]
    DanglingVertexId(VertexId),
    #[error("vertex ids must be the contiguous range 0..{expected}, got id {got}")]
    NonContiguousIds { expected: usize, got: VertexId },
    #[error("robot id {0} out of range for {1} robots")]
    RobotOutOfRange(usize, usize),
    #[error("an exchange graph needs at least 2 robots, got {0}")]
    TooFewRobots(usize),
    #[error("invalid vertex id {0} in set")]
    InvalidVertexId(VertexId),
    #[error("invalid edge id {0} in set")]
    InvalidEdgeId(EdgeId),
    #[error("degree constraints cannot be met: {0}")]
    InfeasibleDegree(String),
}

/// An observation: owned by one robot, with a transmission cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub robot: usize,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// A potential inter-robot loop closure with occurrence probability `p`.
///
/// `pg_edge` optionally links the exchange edge to a candidate edge of a
/// [`crate::posegraph::PoseGraph2D`]; the estimation-theoretic objectives
/// require this mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(skip, default)]
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub p: f64,
    #[serde(default)]
    pub pg_edge: Option<usize>,
}

/// Sorted, deduplicated set of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<VertexId>);

/// Sorted, deduplicated set of edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeSet(Vec<EdgeId>);

macro_rules! impl_id_set {
    ($name:ident) => {
        impl $name {
            pub fn new() -> Self {
                Self(Vec::new())
            }

            /// Builds the set from arbitrary ids, sorting and deduplicating.
            pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
                let mut v: Vec<usize> = ids.into_iter().collect();
                v.sort_unstable();
                v.dedup();
                Self(v)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn contains(&self, id: usize) -> bool {
                self.0.binary_search(&id).is_ok()
            }

            /// Inserts one id, keeping the canonical ascending order.
            pub fn insert(&mut self, id: usize) -> bool {
                match self.0.binary_search(&id) {
                    Ok(_) => false,
                    Err(pos) => {
                        self.0.insert(pos, id);
                        true
                    }
                }
            }

            pub fn union(&self, other: &Self) -> Self {
                Self::from_ids(self.0.iter().chain(other.0.iter()).copied())
            }

            pub fn intersection(&self, other: &Self) -> Self {
                Self::from_ids(self.0.iter().copied().filter(|&x| other.contains(x)))
            }

            pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
                self.0.iter().copied()
            }

            pub fn as_slice(&self) -> &[usize] {
                &self.0
            }

            pub fn is_subset_of(&self, other: &Self) -> bool {
                self.0.iter().all(|&x| other.contains(x))
            }
        }

        impl FromIterator<usize> for $name {
            fn from_iter<I: IntoIterator<Item = usize>>(ids: I) -> Self {
                Self::from_ids(ids)
            }
        }
    };
}

impl_id_set!(VertexSet);
impl_id_set!(EdgeSet);

/// Validated n-partite exchange graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    n_robots: usize,
    /// Incident edge ids per vertex, ascending.
    adjacency: Vec<Vec<EdgeId>>,
}

impl ExchangeGraph {
    /// Validates and builds an exchange graph.
    ///
    /// Enforces: contiguous vertex ids, at least two robots, strictly
    /// positive weights, probabilities in `(0, 1]`, no self-loops, no
    /// duplicate unordered pairs, and no intra-robot edges.
    pub fn new(
        vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
        n_robots: usize,
    ) -> Result<Self, GraphError> {
        if n_robots < 2 {
            return Err(GraphError::TooFewRobots(n_robots));
        }
        let m = vertices.len();
        for (idx, v) in vertices.iter().enumerate() {
            if v.id != idx {
                return Err(GraphError::NonContiguousIds {
                    expected: m,
                    got: v.id,
                });
            }
            if v.robot >= n_robots {
                return Err(GraphError::RobotOutOfRange(v.robot, n_robots));
            }
            if !v.weight.is_finite() || v.weight <= 0.0 {
                return Err(GraphError::NonpositiveWeight(v.id, v.weight));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (idx, e) in edges.iter_mut().enumerate() {
            e.id = idx;
            if e.u >= m {
                return Err(GraphError::DanglingVertexId(e.u));
            }
            if e.v >= m {
                return Err(GraphError::DanglingVertexId(e.v));
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            if vertices[e.u].robot == vertices[e.v].robot {
                return Err(GraphError::IntraRobotEdge(e.u, e.v, vertices[e.u].robot));
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                return Err(GraphError::ProbabilityOutOfRange(e.u, e.v, e.p));
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
        }
        let mut adjacency = vec![Vec::new(); m];
        for e in &edges {
            adjacency[e.u].push(e.id);
            adjacency[e.v].push(e.id);
        }
        Ok(Self {
            vertices,
            edges,
            n_robots,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn robot_count(&self) -> usize {
        self.n_robots
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Edge ids incident to `v`, ascending.
    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn weight(&self, v: VertexId) -> f64 {
        self.vertices[v].weight
    }

    pub fn total_weight(&self) -> f64 {
        self.vertices.iter().map(|v| v.weight).sum()
    }

    /// True when every vertex has the same transmission weight.
    pub fn uniform_weights(&self) -> bool {
        self.vertices
            .windows(2)
            .all(|w| w[0].weight == w[1].weight)
    }

    /// The set of all edge ids.
    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::from_ids(0..self.edges.len())
    }

    /// The set of all vertex ids.
    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::from_ids(0..self.vertices.len())
    }

    /// The lift: every edge with at least one endpoint in `vs`.
    ///
    /// Satisfies `edges_of(S ∪ Q) = edges_of(S) ∪ edges_of(Q)` and
    /// `edges_of(S ∩ Q) ⊆ edges_of(S) ∩ edges_of(Q)`.
    pub fn edges_of(&self, vs: &VertexSet) -> Result<EdgeSet, GraphError> {
        let mut out = Vec::new();
        for v in vs.iter() {
            if v >= self.vertices.len() {
                return Err(GraphError::InvalidVertexId(v));
            }
            out.extend_from_slice(&self.adjacency[v]);
        }
        Ok(EdgeSet::from_ids(out))
    }

    /// Undirected incidence matrix, `vertex_count x edge_count`, entries 0/1.
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.vertices.len(), self.edges.len());
        for e in &self.edges {
            a[(e.u, e.id)] = 1.0;
            a[(e.v, e.id)] = 1.0;
        }
        a
    }

    /// Validates that all ids in `es` denote edges of this graph.
    pub fn check_edge_set(&self, es: &EdgeSet) -> Result<(), GraphError> {
        match es.iter().find(|&e| e >= self.edges.len()) {
            Some(e) => Err(GraphError::InvalidEdgeId(e)),
            None => Ok(()),
        }
    }

    /// Validates that all ids in `vs` denote vertices of this graph.
    pub fn check_vertex_set(&self, vs: &VertexSet) -> Result<(), GraphError> {
        match vs.iter().find(|&v| v >= self.vertices.len()) {
            Some(v) => Err(GraphError::InvalidVertexId(v)),
            None => Ok(()),
        }
    }

    /// Randomly drops edges until every vertex degree is at most `max_degree`.
    ///
    /// Deterministic for a fixed seed. Vertex set, weights, and the relative
    /// order of surviving edges are preserved; edge ids are recompacted.
    pub fn prune_to_max_degree(&self, max_degree: usize, seed: u64) -> ExchangeGraph {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut order: Vec<EdgeId> = (0..self.edges.len()).collect();
        order.shuffle(&mut rng);
        let mut degree = vec![0usize; self.vertices.len()];
        let mut keep = vec![false; self.edges.len()];
        for &eid in &order {
            let e = &self.edges[eid];
            if degree[e.u] < max_degree && degree[e.v] < max_degree {
                keep[eid] = true;
                degree[e.u] += 1;
                degree[e.v] += 1;
            }
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| keep[e.id])
            .cloned()
            .collect();
        ExchangeGraph::new(self.vertices.clone(), edges, self.n_robots)
            .expect("pruning preserves validity")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ExchangeGraphData::from(self)).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphLoadError> {
        let data: ExchangeGraphData = serde_json::from_str(text)?;
        Ok(data.try_into()?)
    }
}

#[derive(Debug, Error)]
pub enum GraphLoadError {
    #[error("malformed exchange-graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] GraphError),
}

/// Wire format: `{"n_robots", "vertices": [{"id","robot","w"}], "edges": [{"u","v","p","pg_edge"}]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ExchangeGraphData {
    pub n_robots: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl From<&ExchangeGraph> for ExchangeGraphData {
    fn from(g: &ExchangeGraph) -> Self {
        Self {
            n_robots: g.n_robots,
            vertices: g.vertices.clone(),
            edges: g.edges.clone(),
        }
    }
}

impl TryFrom<ExchangeGraphData> for ExchangeGraph {
    type Error = GraphError;

    fn try_from(data: ExchangeGraphData) -> Result<Self, GraphError> {
        ExchangeGraph::new(data.vertices, data.edges, data.n_robots)
    }
}

impl Serialize for ExchangeGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ExchangeGraphData::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExchangeGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let data = ExchangeGraphData::deserialize(deserializer)?;
        data.try_into().map_err(serde::de::Error::custom)
    }
}

/// Parameters for [`random_exchange_graph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomGraphParams {
    pub n_robots: usize,
    pub verts_per_robot: usize,
    pub max_degree: usize,
    /// Inclusive range for vertex weights; `[1, 1]` gives unit weights.
    pub weight_range: (f64, f64),
    pub seed: u64,
}

/// Samples a random n-partite exchange graph, deterministic per seed.
///
/// Cross-robot pairs are visited in a seeded random order and kept while both
/// endpoint degrees stay below `max_degree`; probabilities are i.i.d. uniform
/// on `(0, 1]`.
pub fn random_exchange_graph(params: &RandomGraphParams) -> Result<ExchangeGraph, GraphError> {
    let RandomGraphParams {
        n_robots,
        verts_per_robot,
        max_degree,
        weight_range: (w_lo, w_hi),
        seed,
    } = *params;
    if n_robots < 2 {
        return Err(GraphError::InfeasibleDegree(format!(
            "no cross-robot pairs exist with {n_robots} robot(s)"
        )));
    }
    if !(w_lo > 0.0 && w_hi >= w_lo) {
        return Err(GraphError::NonpositiveWeight(0, w_lo));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let m = n_robots * verts_per_robot;
    let vertices: Vec<Vertex> = (0..m)
        .map(|id| Vertex {
            id,
            robot: id / verts_per_robot.max(1),
            weight: if w_lo == w_hi {
                w_lo
            } else {
                rng.random_range(w_lo..=w_hi)
            },
        })
        .collect();

    let mut pairs = Vec::new();
    for u in 0..m {
        for v in (u + 1)..m {
            if vertices[u].robot != vertices[v].robot {
                pairs.push((u, v));
            }
        }
    }
    pairs.shuffle(&mut rng);

    let mut degree = vec![0usize; m];
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if degree[u] < max_degree && degree[v] < max_degree {
            degree[u] += 1;
            degree[v] += 1;
            edges.push(Edge {
                id: edges.len(),
                u,
                v,
                // uniform on (0, 1]: flip the half-open [0, 1) sample
                p: 1.0 - rng.random::<f64>(),
                pg_edge: None,
            });
        }
    }
    ExchangeGraph::new(vertices, edges, n_robots)
}
