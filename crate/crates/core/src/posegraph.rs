//! 2D pose graphs: the estimation-theoretic context behind the
//! tree-connectivity and Fisher-information objectives.
//!
//! A pose graph holds per-pose SE(2) estimates (the odometry-only belief,
//! i.e. the state available at planning time) and relative-pose edges with
//! information matrices. Non-candidate edges (odometry chains plus prior
//! links) form the graph that exists before the rendezvous and must be
//! connected; candidate edges are the potential inter-robot loop closures
//! an [`ExchangeGraph`] refers to through `pg_edge` ids.

use crate::graph::{Edge as XEdge, EdgeSet, ExchangeGraph, GraphError, Vertex as XVertex};
use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PoseGraphError {
    #[error("pose ids must be the contiguous range 0..{expected}, got id {got}")]
    NonContiguousIds { expected: usize, got: usize },
    #[error("anchor pose {0} does not exist")]
    MissingAnchor(usize),
    #[error("edge {0} references unknown pose {1}")]
    InvalidPoseId(usize, usize),
    #[error("edge {0} is a self-loop on pose {1}")]
    SelfLoop(usize, usize),
    #[error("edge {0} has a non-positive-definite noise model")]
    SingularCovariance(usize),
    #[error("the non-candidate pose graph is disconnected")]
    DisconnectedInit,
    #[error("invalid edge id {0}")]
    InvalidEdgeId(usize),
    #[error("g2o parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("manhattan generator: {0}")]
    BadParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta % two_pi;
    if t <= -std::f64::consts::PI {
        t += two_pi;
    } else if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Odometry,
    PriorLoop,
    Candidate,
}

/// Relative SE(2) measurement from pose `i` to pose `j`, expressed in the
/// frame of `i`, with its information matrix (inverse noise covariance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgEdge {
    #[serde(skip, default)]
    pub id: usize,
    pub i: usize,
    pub j: usize,
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    /// Upper triangle of the 3x3 information matrix:
    /// `[I11, I12, I13, I22, I23, I33]`.
    pub info: [f64; 6],
    pub kind: EdgeKind,
    /// Occurrence probability, candidates only.
    #[serde(default)]
    pub p: Option<f64>,
}

impl PgEdge {
    pub fn information(&self) -> Matrix3<f64> {
        let [a, b, c, d, e, f] = self.info;
        Matrix3::new(a, b, c, b, d, e, c, e, f)
    }

    /// Noise covariance, the inverse of the information matrix.
    pub fn covariance(&self) -> Matrix3<f64> {
        self.information()
            .try_inverse()
            .expect("validated SPD information")
    }

    pub fn measurement(&self) -> Vector3<f64> {
        Vector3::new(self.dx, self.dy, self.dtheta)
    }
}

/// Per-edge measurement precisions: reciprocal of the averaged translational
/// variance and of the rotational variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePrecisions {
    pub w_p: f64,
    pub w_theta: f64,
}

/// A symmetric PSD contribution touching at most six state rows.
#[derive(Debug, Clone)]
pub struct ScatteredBlock {
    /// Global reduced-state row indices (anchor rows deleted).
    pub rows: Vec<usize>,
    pub block: DMatrix<f64>,
}

impl ScatteredBlock {
    pub fn to_dense(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        self.add_to(&mut m);
        m
    }

    pub fn add_to(&self, m: &mut DMatrix<f64>) {
        for (a, &ra) in self.rows.iter().enumerate() {
            for (b, &rb) in self.rows.iter().enumerate() {
                m[(ra, rb)] += self.block[(a, b)];
            }
        }
    }
}

/// Rank factor of a [`ScatteredBlock`]: the block equals `cols * cols^T`.
#[derive(Debug, Clone)]
pub struct ScatteredFactor {
    pub rows: Vec<usize>,
    pub cols: DMatrix<f64>,
}

/// Anchored 2D pose graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseGraph2D {
    poses: Vec<Pose>,
    edges: Vec<PgEdge>,
    anchor: usize,
}

impl PoseGraph2D {
    pub fn new(
        poses: Vec<Pose>,
        mut edges: Vec<PgEdge>,
        anchor: usize,
    ) -> Result<Self, PoseGraphError> {
        let n = poses.len();
        for (idx, p) in poses.iter().enumerate() {
            if p.id != idx {
                return Err(PoseGraphError::NonContiguousIds {
                    expected: n,
                    got: p.id,
                });
            }
        }
        if anchor >= n {
            return Err(PoseGraphError::MissingAnchor(anchor));
        }
        let mut dsu: Vec<usize> = (0..n).collect();
        // iterative find: parent chains grow linearly along odometry runs
        fn find(dsu: &mut [usize], x: usize) -> usize {
            let mut root = x;
            while dsu[root] != root {
                root = dsu[root];
            }
            let mut cur = x;
            while dsu[cur] != root {
                let next = dsu[cur];
                dsu[cur] = root;
                cur = next;
            }
            root
        }
        for (idx, e) in edges.iter_mut().enumerate() {
            e.id = idx;
            if e.i >= n {
                return Err(PoseGraphError::InvalidPoseId(idx, e.i));
            }
            if e.j >= n {
                return Err(PoseGraphError::InvalidPoseId(idx, e.j));
            }
            if e.i == e.j {
                return Err(PoseGraphError::SelfLoop(idx, e.i));
            }
            if e.information().cholesky().is_none() {
                return Err(PoseGraphError::SingularCovariance(idx));
            }
            if e.kind != EdgeKind::Candidate {
                let (ri, rj) = (find(&mut dsu, e.i), find(&mut dsu, e.j));
                dsu[ri] = rj;
            }
        }
        let root = find(&mut dsu, 0);
        if (0..n).any(|k| find(&mut dsu, k) != root) {
            return Err(PoseGraphError::DisconnectedInit);
        }
        Ok(Self {
            poses,
            edges,
            anchor,
        })
    }

    pub fn pose_count(&self) -> usize {
        self.poses.len()
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn edges(&self) -> &[PgEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Result<&PgEdge, PoseGraphError> {
        self.edges.get(id).ok_or(PoseGraphError::InvalidEdgeId(id))
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// State dimension after deleting the anchor pose: `3 * (poses - 1)`.
    pub fn state_dim(&self) -> usize {
        3 * (self.poses.len() - 1)
    }

    /// Dimension of the reduced (anchor-deleted) pose-level Laplacian.
    pub fn laplacian_dim(&self) -> usize {
        self.poses.len() - 1
    }

    /// Reduced pose index: anchor maps to `None`.
    pub fn reduced_pose_index(&self, pose: usize) -> Option<usize> {
        use std::cmp::Ordering::*;
        match pose.cmp(&self.anchor) {
            Less => Some(pose),
            Equal => None,
            Greater => Some(pose - 1),
        }
    }

    /// Ids of the edges present before the rendezvous (odometry + priors).
    pub fn init_edges(&self) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.kind != EdgeKind::Candidate)
            .map(|e| e.id)
            .collect()
    }

    /// Ids of the candidate loop-closure edges.
    pub fn candidate_edges(&self) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Candidate)
            .map(|e| e.id)
            .collect()
    }

    pub fn edge_precisions(&self, edge_id: usize) -> Result<EdgePrecisions, PoseGraphError> {
        let e = self.edge(edge_id)?;
        let cov = e.covariance();
        Ok(EdgePrecisions {
            w_p: 1.0 / (0.5 * (cov[(0, 0)] + cov[(1, 1)])),
            w_theta: 1.0 / cov[(2, 2)],
        })
    }

    /// The information contribution `I_e = J_e^T * Omega_e * J_e` of one
    /// edge, linearized at the stored pose estimates and embedded into the
    /// anchored state (anchor rows and columns deleted).
    pub fn information_matrix(&self, edge_id: usize) -> Result<ScatteredBlock, PoseGraphError> {
        let f = self.information_factor(edge_id)?;
        let block = &f.cols * f.cols.transpose();
        Ok(ScatteredBlock {
            rows: f.rows,
            block,
        })
    }

    /// Rank-3 factor `U` of the edge information with `I_e = U * U^T`.
    pub fn information_factor(&self, edge_id: usize) -> Result<ScatteredFactor, PoseGraphError> {
        self.information_factor_at(edge_id, &self.poses)
    }

    /// Same as [`information_factor`](Self::information_factor) but linearized
    /// at caller-provided estimates.
    pub fn information_factor_at(
        &self,
        edge_id: usize,
        linearization: &[Pose],
    ) -> Result<ScatteredFactor, PoseGraphError> {
        let e = self.edge(edge_id)?;
        let pi = &linearization[e.i];
        let pj = &linearization[e.j];
        let (ji, jj) = se2_jacobians(pi, pj);
        let omega_chol = e
            .information()
            .cholesky()
            .ok_or(PoseGraphError::SingularCovariance(edge_id))?;
        let l = omega_chol.l();

        // stacked J = [J_i J_j] (3x6); U = J^T * L so that I_e = U U^T
        let mut rows = Vec::with_capacity(6);
        let mut keep = Vec::with_capacity(6);
        for (pose, offset) in [(e.i, 0usize), (e.j, 3usize)] {
            if let Some(r) = self.reduced_pose_index(pose) {
                for k in 0..3 {
                    rows.push(3 * r + k);
                    keep.push(offset + k);
                }
            }
        }
        let mut jt = DMatrix::zeros(keep.len(), 3);
        for (out_row, &stacked) in keep.iter().enumerate() {
            let src = if stacked < 3 { &ji } else { &jj };
            let r = stacked % 3;
            for c in 0..3 {
                // J^T entry: transpose of the 3x6 stacked jacobian
                jt[(out_row, c)] = src[(c, r)];
            }
        }
        let cols = jt * DMatrix::from_column_slice(3, 3, l.as_slice());
        Ok(ScatteredFactor { rows, cols })
    }

    /// Weighted pose-level graph Laplacian over the union of the
    /// pre-rendezvous edges and `extra` candidate edges, with the anchor row
    /// and column removed. `weights` is indexed by edge id and must be
    /// positive on every included edge.
    pub fn reduced_laplacian(&self, weights: &[f64], extra: &EdgeSet) -> DMatrix<f64> {
        let dim = self.laplacian_dim();
        let mut l = DMatrix::zeros(dim, dim);
        for e in &self.edges {
            let included = e.kind != EdgeKind::Candidate || extra.contains(e.id);
            if !included {
                continue;
            }
            let w = weights[e.id];
            self.add_laplacian_edge(&mut l, e.i, e.j, w);
        }
        l
    }

    fn add_laplacian_edge(&self, l: &mut DMatrix<f64>, i: usize, j: usize, w: f64) {
        let ri = self.reduced_pose_index(i);
        let rj = self.reduced_pose_index(j);
        if let Some(a) = ri {
            l[(a, a)] += w;
        }
        if let Some(b) = rj {
            l[(b, b)] += w;
        }
        if let (Some(a), Some(b)) = (ri, rj) {
            l[(a, b)] -= w;
            l[(b, a)] -= w;
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&PoseGraphData::from(self)).expect("serializable")
    }

    pub fn from_json_str(text: &str) -> Result<Self, PoseGraphError> {
        let data: PoseGraphData =
            serde_json::from_str(text).map_err(|e| PoseGraphError::ParseError {
                line: 0,
                msg: e.to_string(),
            })?;
        PoseGraph2D::new(data.poses, data.edges, data.anchor)
    }
}

/// JSON mirror of [`PoseGraph2D`], matching the exchange-graph module style.
#[derive(Debug, Serialize, Deserialize)]
pub struct PoseGraphData {
    pub anchor: usize,
    pub poses: Vec<Pose>,
    pub edges: Vec<PgEdge>,
}

impl From<&PoseGraph2D> for PoseGraphData {
    fn from(pg: &PoseGraph2D) -> Self {
        Self {
            anchor: pg.anchor,
            poses: pg.poses.clone(),
            edges: pg.edges.clone(),
        }
    }
}

impl Serialize for PoseGraph2D {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PoseGraphData::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PoseGraph2D {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let data = PoseGraphData::deserialize(deserializer)?;
        PoseGraph2D::new(data.poses, data.edges, data.anchor).map_err(serde::de::Error::custom)
    }
}

fn rot(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Relative SE(2) measurement model: pose of `j` in the frame of `i`.
pub fn se2_relative(pi: &Pose, pj: &Pose) -> Vector3<f64> {
    let dt = Vector2::new(pj.x - pi.x, pj.y - pi.y);
    let local = rot(pi.theta).transpose() * dt;
    Vector3::new(local.x, local.y, wrap_angle(pj.theta - pi.theta))
}

/// Analytic Jacobians of [`se2_relative`] with respect to pose `i` and `j`.
pub fn se2_jacobians(pi: &Pose, pj: &Pose) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = pi.theta.sin_cos();
    let dx = pj.x - pi.x;
    let dy = pj.y - pi.y;
    // d(R^T)/dtheta applied to (pj - pi)
    let dr_dt = Vector2::new(-s * dx + c * dy, -c * dx - s * dy);
    let rt = rot(pi.theta).transpose();
    let ji = Matrix3::new(
        -rt[(0, 0)],
        -rt[(0, 1)],
        dr_dt.x,
        -rt[(1, 0)],
        -rt[(1, 1)],
        dr_dt.y,
        0.0,
        0.0,
        -1.0,
    );
    let jj = Matrix3::new(
        rt[(0, 0)],
        rt[(0, 1)],
        0.0,
        rt[(1, 0)],
        rt[(1, 1)],
        0.0,
        0.0,
        0.0,
        1.0,
    );
    (ji, jj)
}

/// Parameters of the Manhattan-world simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManhattanParams {
    /// Walks are confined to the `[0, grid_size]^2` unit lattice.
    pub grid_size: usize,
    pub n_robots: usize,
    pub steps_per_robot: usize,
    pub odom_sigma_xy: f64,
    pub odom_sigma_theta: f64,
    /// Candidate loop closures between poses of distinct robots closer than
    /// this radius (true positions). Zero disables candidates.
    pub loop_radius: f64,
    pub seed: u64,
}

impl Default for ManhattanParams {
    fn default() -> Self {
        Self {
            grid_size: 10,
            n_robots: 2,
            steps_per_robot: 50,
            odom_sigma_xy: 0.05,
            odom_sigma_theta: 0.01,
            loop_radius: 1.0,
            seed: 0,
        }
    }
}

/// Simulates `n_robots` Manhattan random walks with noisy odometry and
/// builds the matching exchange graph.
///
/// Robot chains are tied together by prior links between consecutive robots'
/// first poses, so the pre-rendezvous pose graph is connected. Candidate
/// edges connect poses of distinct robots within `loop_radius` of each other
/// (true positions); their occurrence probabilities are i.i.d. uniform on
/// `(0, 1]` and their noise model is the odometry one. Stored pose
/// coordinates are the odometry-only estimates; exchange vertices are the
/// candidate-owning poses with unit weight. Deterministic per seed.
pub fn generate_manhattan(
    params: &ManhattanParams,
) -> Result<(PoseGraph2D, ExchangeGraph), PoseGraphError> {
    let p = params;
    if p.n_robots < 2 {
        return Err(PoseGraphError::BadParams(format!(
            "need at least 2 robots, got {}",
            p.n_robots
        )));
    }
    if p.grid_size < 2 || p.steps_per_robot == 0 {
        return Err(PoseGraphError::BadParams(
            "grid_size must be >= 2 and steps_per_robot >= 1".into(),
        ));
    }
    if p.odom_sigma_xy <= 0.0 || p.odom_sigma_theta <= 0.0 {
        return Err(PoseGraphError::BadParams(
            "odometry noise must be positive".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
    let noise_xy = Normal::new(0.0, p.odom_sigma_xy).unwrap();
    let noise_th = Normal::new(0.0, p.odom_sigma_theta).unwrap();
    let info = info_upper(p.odom_sigma_xy, p.odom_sigma_theta);

    let chain = p.steps_per_robot + 1;
    let total = p.n_robots * chain;
    let mut truth: Vec<Pose> = Vec::with_capacity(total);
    let mut edges: Vec<PgEdge> = Vec::new();

    use rand::Rng;
    for robot in 0..p.n_robots {
        let gs = p.grid_size as i64;
        let mut cx = rng.random_range(0..=gs);
        let mut cy = rng.random_range(0..=gs);
        let mut heading: i64 = rng.random_range(0..4);
        let base = robot * chain;
        truth.push(Pose {
            id: base,
            x: cx as f64,
            y: cy as f64,
            theta: heading_angle(heading),
        });
        for step in 0..p.steps_per_robot {
            // mostly straight, occasional 90deg turns, forced at walls
            let r: f64 = rng.random();
            let mut h = if r < 0.7 {
                heading
            } else if r < 0.85 {
                (heading + 1).rem_euclid(4)
            } else {
                (heading + 3).rem_euclid(4)
            };
            for _ in 0..4 {
                let (dx, dy) = heading_delta(h);
                if (0..=gs).contains(&(cx + dx)) && (0..=gs).contains(&(cy + dy)) {
                    break;
                }
                h = (h + 1).rem_euclid(4);
            }
            let (dx, dy) = heading_delta(h);
            cx += dx;
            cy += dy;
            heading = h;
            let id = base + step + 1;
            truth.push(Pose {
                id,
                x: cx as f64,
                y: cy as f64,
                theta: heading_angle(heading),
            });
            let meas = se2_relative(&truth[id - 1], &truth[id]);
            edges.push(PgEdge {
                id: edges.len(),
                i: id - 1,
                j: id,
                dx: meas.x + noise_xy.sample(&mut rng),
                dy: meas.y + noise_xy.sample(&mut rng),
                dtheta: wrap_angle(meas.z + noise_th.sample(&mut rng)),
                info,
                kind: EdgeKind::Odometry,
                p: None,
            });
        }
    }

    // prior links tying consecutive robots' first poses together
    for robot in 1..p.n_robots {
        let i = (robot - 1) * chain;
        let j = robot * chain;
        let meas = se2_relative(&truth[i], &truth[j]);
        edges.push(PgEdge {
            id: edges.len(),
            i,
            j,
            dx: meas.x + noise_xy.sample(&mut rng),
            dy: meas.y + noise_xy.sample(&mut rng),
            dtheta: wrap_angle(meas.z + noise_th.sample(&mut rng)),
            info,
            kind: EdgeKind::PriorLoop,
            p: None,
        });
    }

    // candidate loop closures between distinct robots, by true distance
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    if p.loop_radius > 0.0 {
        for a in 0..total {
            for b in (a + 1)..total {
                if a / chain == b / chain {
                    continue;
                }
                let d = ((truth[a].x - truth[b].x).powi(2) + (truth[a].y - truth[b].y).powi(2))
                    .sqrt();
                if d <= p.loop_radius {
                    let prob = 1.0 - rng.random::<f64>();
                    candidates.push((a, b, prob));
                }
            }
        }
    }
    for &(a, b, prob) in &candidates {
        let meas = se2_relative(&truth[a], &truth[b]);
        edges.push(PgEdge {
            id: edges.len(),
            i: a,
            j: b,
            dx: meas.x + noise_xy.sample(&mut rng),
            dy: meas.y + noise_xy.sample(&mut rng),
            dtheta: wrap_angle(meas.z + noise_th.sample(&mut rng)),
            info,
            kind: EdgeKind::Candidate,
            p: Some(prob),
        });
    }

    let estimates = propagate_estimates(total, &edges);
    let pg = PoseGraph2D::new(estimates, edges, 0)?;
    let xg = exchange_from_candidates(&pg, |pose| pose / chain, p.n_robots)?;
    Ok((pg, xg))
}

fn heading_angle(h: i64) -> f64 {
    wrap_angle(h as f64 * std::f64::consts::FRAC_PI_2)
}

fn heading_delta(h: i64) -> (i64, i64) {
    match h.rem_euclid(4) {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    }
}

fn info_upper(sigma_xy: f64, sigma_theta: f64) -> [f64; 6] {
    let wp = 1.0 / (sigma_xy * sigma_xy);
    let wt = 1.0 / (sigma_theta * sigma_theta);
    [wp, 0.0, 0.0, wp, 0.0, wt]
}

/// Dead-reckons pose estimates from pose 0 through the non-candidate edges.
fn propagate_estimates(n: usize, edges: &[PgEdge]) -> Vec<Pose> {
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); n];
    for e in edges {
        if e.kind == EdgeKind::Candidate {
            continue;
        }
        adj[e.i].push((e.j, e.id, true));
        adj[e.j].push((e.i, e.id, false));
    }
    let mut out = vec![
        Pose {
            id: 0,
            x: 0.0,
            y: 0.0,
            theta: 0.0
        };
        n
    ];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &(v, eid, forward) in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            let e = &edges[eid];
            let base = out[u];
            let next = if forward {
                compose(&base, e.dx, e.dy, e.dtheta)
            } else {
                // invert the measurement: pose i from pose j
                invert_compose(&base, e.dx, e.dy, e.dtheta)
            };
            out[v] = Pose {
                id: v,
                x: next.0,
                y: next.1,
                theta: next.2,
            };
            queue.push_back(v);
        }
    }
    for (id, p) in out.iter_mut().enumerate() {
        p.id = id;
    }
    out
}

fn compose(base: &Pose, dx: f64, dy: f64, dtheta: f64) -> (f64, f64, f64) {
    let r = rot(base.theta);
    let t = r * Vector2::new(dx, dy);
    (base.x + t.x, base.y + t.y, wrap_angle(base.theta + dtheta))
}

fn invert_compose(base: &Pose, dx: f64, dy: f64, dtheta: f64) -> (f64, f64, f64) {
    let theta_prev = wrap_angle(base.theta - dtheta);
    let r = rot(theta_prev);
    let t = r * Vector2::new(dx, dy);
    (base.x - t.x, base.y - t.y, theta_prev)
}

/// Builds the exchange graph whose vertices are the candidate-owning poses
/// (unit weight) and whose edges mirror candidate pose edges via `pg_edge`.
fn exchange_from_candidates(
    pg: &PoseGraph2D,
    robot_of: impl Fn(usize) -> usize,
    n_robots: usize,
) -> Result<ExchangeGraph, PoseGraphError> {
    let mut owner: Vec<usize> = pg
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Candidate)
        .flat_map(|e| [e.i, e.j])
        .collect();
    owner.sort_unstable();
    owner.dedup();
    let index: std::collections::HashMap<usize, usize> = owner
        .iter()
        .enumerate()
        .map(|(k, &pose)| (pose, k))
        .collect();
    let vertices: Vec<XVertex> = owner
        .iter()
        .enumerate()
        .map(|(k, &pose)| XVertex {
            id: k,
            robot: robot_of(pose),
            weight: 1.0,
        })
        .collect();
    let edges: Vec<XEdge> = pg
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::Candidate)
        .enumerate()
        .map(|(k, e)| XEdge {
            id: k,
            u: index[&e.i],
            v: index[&e.j],
            p: e.p.unwrap_or(1.0),
            pg_edge: Some(e.id),
        })
        .collect();
    Ok(ExchangeGraph::new(vertices, edges, n_robots)?)
}

/// Attaches a synthetic estimation context to an arbitrary exchange graph:
/// one pose per exchange vertex on a smooth deterministic path, a noisy
/// odometry chain linking consecutive poses, and one candidate pose edge per
/// exchange edge. Returns the pose graph and a copy of the exchange graph
/// with `pg_edge` ids filled in.
pub fn attach_chain_context(
    g: &ExchangeGraph,
    sigma_xy: f64,
    sigma_theta: f64,
    seed: u64,
) -> Result<(PoseGraph2D, ExchangeGraph), PoseGraphError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(PoseGraphError::BadParams(
            "need at least 2 vertices to build a chain context".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let noise_xy = Normal::new(0.0, sigma_xy)
        .map_err(|_| PoseGraphError::BadParams("sigma_xy must be positive".into()))?;
    let noise_th = Normal::new(0.0, sigma_theta)
        .map_err(|_| PoseGraphError::BadParams("sigma_theta must be positive".into()))?;
    let info = info_upper(sigma_xy, sigma_theta);

    let truth: Vec<Pose> = (0..n)
        .map(|k| Pose {
            id: k,
            x: k as f64,
            y: 0.4 * (k as f64).sin(),
            theta: wrap_angle(0.25 * (k as f64).cos()),
        })
        .collect();

    let mut edges = Vec::new();
    for k in 0..n - 1 {
        let meas = se2_relative(&truth[k], &truth[k + 1]);
        edges.push(PgEdge {
            id: edges.len(),
            i: k,
            j: k + 1,
            dx: meas.x + noise_xy.sample(&mut rng),
            dy: meas.y + noise_xy.sample(&mut rng),
            dtheta: wrap_angle(meas.z + noise_th.sample(&mut rng)),
            info,
            kind: EdgeKind::Odometry,
            p: None,
        });
    }
    let mut mapped_edges = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let meas = se2_relative(&truth[e.u], &truth[e.v]);
        let pg_edge = edges.len();
        edges.push(PgEdge {
            id: pg_edge,
            i: e.u,
            j: e.v,
            dx: meas.x + noise_xy.sample(&mut rng),
            dy: meas.y + noise_xy.sample(&mut rng),
            dtheta: wrap_angle(meas.z + noise_th.sample(&mut rng)),
            info,
            kind: EdgeKind::Candidate,
            p: Some(e.p),
        });
        let mut mapped = *e;
        mapped.pg_edge = Some(pg_edge);
        mapped_edges.push(mapped);
    }
    let estimates = propagate_estimates(n, &edges);
    let pg = PoseGraph2D::new(estimates, edges, 0)?;
    let xg = ExchangeGraph::new(g.vertices().to_vec(), mapped_edges, g.robot_count())?;
    Ok((pg, xg))
}

/// Serializes to the supported g2o subset (`VERTEX_SE2`, `EDGE_SE2`, `FIX`)
/// plus the comment-prefixed extension records `# CANDIDATE i j p` and
/// `# PRIOR i j` that preserve edge kinds across a round trip.
pub fn write_g2o(pg: &PoseGraph2D) -> String {
    let mut out = String::new();
    use std::fmt::Write;
    for p in pg.poses() {
        writeln!(out, "VERTEX_SE2 {} {} {} {}", p.id, p.x, p.y, p.theta).unwrap();
    }
    writeln!(out, "FIX {}", pg.anchor()).unwrap();
    for e in pg.edges() {
        let [a, b, c, d, ee, f] = e.info;
        writeln!(
            out,
            "EDGE_SE2 {} {} {} {} {} {} {} {} {} {} {}",
            e.i, e.j, e.dx, e.dy, e.dtheta, a, b, c, d, ee, f
        )
        .unwrap();
        match e.kind {
            EdgeKind::Candidate => {
                writeln!(out, "# CANDIDATE {} {} {}", e.i, e.j, e.p.unwrap_or(1.0)).unwrap()
            }
            EdgeKind::PriorLoop => writeln!(out, "# PRIOR {} {}", e.i, e.j).unwrap(),
            EdgeKind::Odometry => {}
        }
    }
    out
}

/// Parses the supported g2o subset. Returns the pose graph together with
/// warnings about skipped unsupported tags. Pose ids are remapped to a dense
/// range when the file leaves gaps.
pub fn parse_g2o(text: &str) -> Result<(PoseGraph2D, Vec<String>), PoseGraphError> {
    enum Mark {
        Candidate(i64, i64, f64),
        Prior(i64, i64),
    }
    let mut raw_poses: Vec<(i64, f64, f64, f64)> = Vec::new();
    let mut raw_edges: Vec<(i64, i64, f64, f64, f64, [f64; 6])> = Vec::new();
    // marks tagged with how many edges precede them, so that a mark written
    // right after its edge claims that edge even when endpoint pairs repeat
    let mut marks: Vec<(usize, Mark)> = Vec::new();
    let mut fixed: Option<i64> = None;
    let mut warnings = Vec::new();

    let err = |line: usize, msg: &str| PoseGraphError::ParseError {
        line,
        msg: msg.to_string(),
    };
    let parse_f = |tok: &str, line: usize| -> Result<f64, PoseGraphError> {
        tok.parse::<f64>()
            .map_err(|_| err(line, &format!("bad float `{tok}`")))
    };
    let parse_i = |tok: &str, line: usize| -> Result<i64, PoseGraphError> {
        tok.parse::<i64>()
            .map_err(|_| err(line, &format!("bad integer `{tok}`")))
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "VERTEX_SE2" => {
                if toks.len() != 5 {
                    return Err(err(line, "VERTEX_SE2 needs `id x y theta`"));
                }
                raw_poses.push((
                    parse_i(toks[1], line)?,
                    parse_f(toks[2], line)?,
                    parse_f(toks[3], line)?,
                    parse_f(toks[4], line)?,
                ));
            }
            "EDGE_SE2" => {
                if toks.len() != 12 {
                    return Err(err(
                        line,
                        "EDGE_SE2 needs `i j dx dy dtheta` and 6 information entries",
                    ));
                }
                let mut info = [0.0; 6];
                for (k, slot) in info.iter_mut().enumerate() {
                    *slot = parse_f(toks[6 + k], line)?;
                }
                raw_edges.push((
                    parse_i(toks[1], line)?,
                    parse_i(toks[2], line)?,
                    parse_f(toks[3], line)?,
                    parse_f(toks[4], line)?,
                    parse_f(toks[5], line)?,
                    info,
                ));
            }
            "FIX" => {
                if toks.len() != 2 {
                    return Err(err(line, "FIX needs `id`"));
                }
                fixed = Some(parse_i(toks[1], line)?);
            }
            "#" => match toks.get(1).copied() {
                Some("CANDIDATE") => {
                    if toks.len() != 5 {
                        return Err(err(line, "# CANDIDATE needs `i j p`"));
                    }
                    marks.push((
                        raw_edges.len(),
                        Mark::Candidate(
                            parse_i(toks[2], line)?,
                            parse_i(toks[3], line)?,
                            parse_f(toks[4], line)?,
                        ),
                    ));
                }
                Some("PRIOR") => {
                    if toks.len() != 4 {
                        return Err(err(line, "# PRIOR needs `i j`"));
                    }
                    marks.push((
                        raw_edges.len(),
                        Mark::Prior(parse_i(toks[2], line)?, parse_i(toks[3], line)?),
                    ));
                }
                _ => {} // ordinary comment
            },
            tag => warnings.push(format!("line {line}: skipped unsupported tag `{tag}`")),
        }
    }

    let mut ids: Vec<i64> = raw_poses.iter().map(|p| p.0).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != raw_poses.len() {
        return Err(err(0, "duplicate VERTEX_SE2 id"));
    }
    let dense: std::collections::HashMap<i64, usize> = ids
        .iter()
        .enumerate()
        .map(|(k, &id)| (id, k))
        .collect();
    let mut poses: Vec<Pose> = vec![
        Pose {
            id: 0,
            x: 0.0,
            y: 0.0,
            theta: 0.0
        };
        ids.len()
    ];
    for (id, x, y, theta) in raw_poses {
        let k = dense[&id];
        poses[k] = Pose { id: k, x, y, theta };
    }

    let lookup = |raw: i64| -> Result<usize, PoseGraphError> {
        dense
            .get(&raw)
            .copied()
            .ok_or_else(|| err(0, &format!("edge references unknown pose {raw}")))
    };

    let mut edges = Vec::with_capacity(raw_edges.len());
    for (i, j, dx, dy, dtheta, info) in raw_edges {
        edges.push(PgEdge {
            id: edges.len(),
            i: lookup(i)?,
            j: lookup(j)?,
            dx,
            dy,
            dtheta,
            info,
            kind: EdgeKind::Odometry,
            p: None,
        });
    }
    // a mark claims the nearest preceding unmarked edge with matching
    // endpoints, falling back to the first unmarked match anywhere
    for (seen, mark) in marks {
        let (ri, rj) = match &mark {
            Mark::Candidate(i, j, _) => (lookup(*i)?, lookup(*j)?),
            Mark::Prior(i, j) => (lookup(*i)?, lookup(*j)?),
        };
        let matches = |e: &PgEdge| {
            e.kind == EdgeKind::Odometry && ((e.i, e.j) == (ri, rj) || (e.i, e.j) == (rj, ri))
        };
        let idx = edges[..seen.min(edges.len())]
            .iter()
            .rposition(matches)
            .or_else(|| edges.iter().position(matches))
            .ok_or_else(|| err(0, &format!("kind mark without edge ({ri},{rj})")))?;
        match mark {
            Mark::Candidate(_, _, p) => {
                edges[idx].kind = EdgeKind::Candidate;
                edges[idx].p = Some(p);
            }
            Mark::Prior(_, _) => edges[idx].kind = EdgeKind::PriorLoop,
        }
    }

    let anchor = match fixed {
        Some(raw) => lookup(raw)?,
        None => {
            warnings.push("no FIX record; anchoring pose 0".into());
            0
        }
    };
    let pg = PoseGraph2D::new(poses, edges, anchor)?;
    Ok((pg, warnings))
}
