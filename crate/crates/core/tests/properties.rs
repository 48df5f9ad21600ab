//! Property tests for the structural invariants: lift algebra, cover
//! guarantees, and format round trips.

mod common;

use budgex_core::cover::{apx_vertex_cover, is_cover, vertex_cover_lp_halfintegral};
use budgex_core::graph::{EdgeSet, ExchangeGraph, VertexSet};
use budgex_core::posegraph::{generate_manhattan, parse_g2o, write_g2o, ManhattanParams};
use proptest::prelude::*;

/// Strategy: a valid n-partite exchange graph plus two vertex subsets.
fn graph_and_subsets() -> impl Strategy<Value = (ExchangeGraph, VertexSet, VertexSet)> {
    (2usize..4, 4usize..12, 0.05f64..0.6, any::<u64>()).prop_flat_map(
        |(n_robots, verts, density, seed)| {
            let g = common::random_instance(seed, n_robots, verts, density, false);
            let m = g.vertex_count();
            (
                Just(g),
                proptest::collection::vec(0..m, 0..m),
                proptest::collection::vec(0..m, 0..m),
            )
                .prop_map(|(g, a, b)| {
                    (g, VertexSet::from_ids(a), VertexSet::from_ids(b))
                })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lift_union_and_intersection_laws((g, a, b) in graph_and_subsets()) {
        let ea = g.edges_of(&a).unwrap();
        let eb = g.edges_of(&b).unwrap();
        let e_union = g.edges_of(&a.union(&b)).unwrap();
        let e_inter = g.edges_of(&a.intersection(&b)).unwrap();
        prop_assert_eq!(&ea.union(&eb), &e_union);
        prop_assert!(e_inter.is_subset_of(&ea.intersection(&eb)));
        // monotone: S ⊆ S∪Q lifts to edge containment
        prop_assert!(ea.is_subset_of(&e_union));
        // lift output stays inside the parent edge set and is canonical
        prop_assert!(e_union.is_subset_of(&g.all_edges()));
        let recanon = EdgeSet::from_ids(e_union.iter());
        prop_assert_eq!(recanon, e_union);
    }

    #[test]
    fn cover_guarantees_hold((g, a, _b) in graph_and_subsets()) {
        let es = g.edges_of(&a).unwrap();
        let res = apx_vertex_cover(&g, &es);
        prop_assert!(is_cover(&g, &res.cover, &es).unwrap());
        prop_assert!(res.lp_value <= res.value + 1e-9);
        prop_assert!(res.value <= 2.0 * res.lp_value + 1e-9);
        let (pi, lp) = vertex_cover_lp_halfintegral(&g, &es);
        prop_assert!((lp - res.lp_value).abs() < 1e-9);
        for x in pi {
            prop_assert!(
                x == 0.0 || (x - 0.5).abs() < 1e-12 || (x - 1.0).abs() < 1e-12
            );
        }
    }

    #[test]
    fn exchange_graph_json_round_trip((g, _a, _b) in graph_and_subsets()) {
        let text = g.to_json_string();
        let back = ExchangeGraph::from_json_str(&text).unwrap();
        prop_assert_eq!(g, back);
    }

    #[test]
    fn g2o_round_trip(seed in any::<u64>(), robots in 2usize..4, steps in 5usize..25) {
        let params = ManhattanParams {
            n_robots: robots,
            steps_per_robot: steps,
            loop_radius: 1.2,
            seed,
            ..Default::default()
        };
        let (pg, _) = generate_manhattan(&params).unwrap();
        let text = write_g2o(&pg);
        let (back, warnings) = parse_g2o(&text).unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert_eq!(pg, back);
    }

    #[test]
    fn planner_outputs_keep_their_invariants(
        (g, _a, _b) in graph_and_subsets(),
        b in 0usize..8,
        seed in any::<u64>(),
    ) {
        use budgex_core::greedy::*;
        let spec = budgex_core::objectives::ObjectiveSpec::nlc();
        let plans = [
            vertex_greedy_uniform(&g, &spec, b, &GreedyOptions::default()).unwrap(),
            vertex_greedy_uniform(&g, &spec, b, &GreedyOptions::no_recompute()).unwrap(),
            cost_benefit_greedy(&g, &spec, b as f64, &GreedyOptions::default()).unwrap(),
            edge_greedy_baseline(&g, &spec, b as f64).unwrap(),
            random_baseline(&g, &spec, b as f64, seed).unwrap(),
        ];
        for plan in plans {
            prop_assert!(plan.cost <= b as f64 + 1e-9, "{}: cost {}", plan.algo, plan.cost);
            prop_assert!(plan.cover.value <= b as f64 + 1e-9);
            prop_assert_eq!(&plan.l_grd, &g.edges_of(&plan.v_grd).unwrap());
            prop_assert!(is_cover(&g, &plan.cover.cover, &plan.l_grd).unwrap());
            let fe = spec.eval_edges(&g, &plan.l_grd).unwrap();
            prop_assert!(plan.value == fe, "{}: value {} vs f_e {}", plan.algo, plan.value, fe);
        }
    }

    #[test]
    fn nlc_vertex_objective_depends_only_on_lift((g, a, _b) in graph_and_subsets()) {
        // isolated vertices contribute nothing
        let spec = budgex_core::objectives::ObjectiveSpec::nlc();
        let with_isolated = spec.eval_vertices(&g, &a).unwrap();
        let support = VertexSet::from_ids(a.iter().filter(|&v| g.degree(v) > 0));
        let without = spec.eval_vertices(&g, &support).unwrap();
        prop_assert_eq!(with_isolated, without);
    }
}
