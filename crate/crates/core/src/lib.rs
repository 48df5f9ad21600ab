//! Planner library for budgeted data exchange in collaborative SLAM front-ends.
//!
//! During a rendezvous, robots identify *potential* inter-robot loop closures
//! and must decide which full observations to broadcast when the transmission
//! budget is too small to verify every candidate. This crate models the
//! problem on an n-partite *exchange graph* (observations are vertices,
//! candidate loop closures are edges with occurrence probabilities) and
//! provides:
//!
//! - [`graph`]: the exchange-graph data model, validation, and the
//!   vertex-to-edge lift `edges_of`;
//! - [`cover`]: weighted vertex-cover machinery (exact bipartite covers and a
//!   half-integral LP rounding 2-approximation for general graphs);
//! - [`posegraph`]: 2D pose graphs, Manhattan-world simulation, SE(2)
//!   information matrices, and a g2o-subset parser;
//! - [`objectives`]: the three normalized monotone submodular objectives
//!   (expected loop closures, tree connectivity, Fisher-information
//!   D-criterion) with incremental marginal-gain evaluation;
//! - [`greedy`]: budgeted greedy planners with cover recomputation, lazy
//!   screening, and the edge-greedy / random baselines;
//! - [`certify`]: a posteriori optimality certificates via exhaustive search,
//!   an LP relaxation, and Frank-Wolfe bounds on the concave relaxations.

pub mod certify;
pub mod cover;
pub mod graph;
pub mod greedy;
pub mod objectives;
pub mod posegraph;

pub use certify::{nlc_upper_bound, oracle_opt, smooth_upper_bound, Certificate};
pub use cover::{apx_vertex_cover, cover_value, is_cover, min_cover_bipartite, CoverResult};
pub use graph::{EdgeSet, ExchangeGraph, VertexSet};
pub use greedy::{
    cost_benefit_greedy, edge_greedy_baseline, random_baseline, vertex_greedy_uniform,
    GreedyOptions, PlanResult,
};
pub use objectives::{EvalState, ObjectiveKind, ObjectiveSpec};
pub use posegraph::PoseGraph2D;
