//! Shared fixtures and independent brute-force oracles for the integration
//! suites. The oracles deliberately avoid the library's search machinery:
//! optima come from raw subset enumeration, covers from bitmask scans, and
//! spanning-tree counts from edge-subset enumeration.

#![allow(dead_code)]

use budgex_core::graph::{Edge, EdgeSet, ExchangeGraph, Vertex, VertexSet};
use budgex_core::objectives::ObjectiveSpec;
use budgex_core::posegraph::PoseGraph2D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// The 9-vertex, 8-edge, 3-robot example graph; ids: a1,a2,a3,b1,b2,b3,
/// c1,c2,c3 = 0..9 with robots a=0, b=1, c=2.
pub fn three_robot_example(p: f64) -> ExchangeGraph {
    let vertices = (0..9)
        .map(|id| Vertex {
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
        .map(|(id, &(u, v))| Edge {
            id,
            u,
            v,
            p,
            pg_edge: None,
        })
        .collect();
    ExchangeGraph::new(vertices, edges, 3).unwrap()
}

/// Random n-partite graph with explicit control over size and weights.
pub fn random_instance(
    seed: u64,
    n_robots: usize,
    total_vertices: usize,
    edge_prob: f64,
    weighted: bool,
) -> ExchangeGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let vertices: Vec<Vertex> = (0..total_vertices)
        .map(|id| Vertex {
            id,
            robot: id % n_robots,
            weight: if weighted {
                rng.random_range(1.0..4.0)
            } else {
                1.0
            },
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..total_vertices {
        for v in (u + 1)..total_vertices {
            if vertices[u].robot != vertices[v].robot && rng.random::<f64>() < edge_prob {
                edges.push(Edge {
                    id: edges.len(),
                    u,
                    v,
                    p: 1.0 - rng.random::<f64>(),
                    pg_edge: None,
                });
            }
        }
    }
    ExchangeGraph::new(vertices, edges, n_robots).unwrap()
}

/// Independent exhaustive optimum of the budgeted vertex problem:
/// every subset with total weight within budget, no pruning tricks.
pub fn brute_force_opt(g: &ExchangeGraph, spec: &ObjectiveSpec, b: f64) -> f64 {
    let m = g.vertex_count();
    assert!(m <= 20, "exhaustive oracle capped at 20 vertices");
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << m) {
        let vs = VertexSet::from_ids((0..m).filter(|&v| mask & (1 << v) != 0));
        let weight: f64 = vs.iter().map(|v| g.weight(v)).sum();
        if weight <= b + 1e-9 {
            let value = spec.eval_vertices(g, &vs).unwrap();
            if value > best {
                best = value;
            }
        }
    }
    best
}

/// Minimum weighted vertex-cover value by bitmask scan.
pub fn brute_min_cover(g: &ExchangeGraph, es: &EdgeSet) -> f64 {
    let m = g.vertex_count();
    assert!(m <= 20);
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << m) {
        let vs = VertexSet::from_ids((0..m).filter(|&v| mask & (1 << v) != 0));
        if budgex_core::cover::is_cover(g, &vs, es).unwrap() {
            let w: f64 = vs.iter().map(|v| g.weight(v)).sum();
            best = best.min(w);
        }
    }
    best
}

/// Total spanning-tree weight by enumerating edge subsets of size n-1 over
/// the listed `(i, j, w)` edges on `n` nodes.
pub fn enumerate_tree_weight(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let m = edges.len();
    assert!(m <= 24);
    let need = n - 1;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize != need {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut weight = 1.0;
        let mut acyclic = true;
        for (k, &(i, j, w)) in edges.iter().enumerate() {
            if mask & (1 << k) == 0 {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri == rj {
                acyclic = false;
                break;
            }
            parent[ri] = rj;
            weight *= w;
        }
        if acyclic {
            total += weight;
        }
    }
    total
}

/// Builds the per-objective spec, attaching a synthetic pose context for the
/// estimation-theoretic objectives.
pub fn spec_with_context(
    g: &ExchangeGraph,
    kind: budgex_core::objectives::ObjectiveKind,
    seed: u64,
) -> (ObjectiveSpec, ExchangeGraph, Option<PoseGraph2D>) {
    use budgex_core::objectives::ObjectiveKind::*;
    match kind {
        Nlc => (ObjectiveSpec::nlc(), g.clone(), None),
        Wst | Fim => {
            let (pg, xg) =
                budgex_core::posegraph::attach_chain_context(g, 0.08, 0.03, seed).unwrap();
            let spec = ObjectiveSpec::for_kind(kind, &xg, Some(&pg)).unwrap();
            (spec, xg, Some(pg))
        }
    }
}
