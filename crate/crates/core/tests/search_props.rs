mod common;

use graphnas_core::rng;
use graphnas_core::search::{predict_graph, propose, search, Mode, OpKind, SearchConfig};
use graphnas_core::surrogate::RegressionModel;
use graphnas_core::{Feature, Graph};
use proptest::prelude::*;

use common::connected_graph;

const CHEAP: [Feature; 6] = [
    Feature::AverageDegree,
    Feature::ClusteringCoefficient,
    Feature::Transitivity,
    Feature::GlobalEfficiency,
    Feature::Heterogeneity,
    Feature::AveragePathLength,
];

fn model() -> impl Strategy<Value = RegressionModel<f64>> {
    (
        proptest::sample::subsequence(CHEAP.to_vec(), 1..4),
        any::<u64>(),
        0.1..1.0f64,
    )
        .prop_map(|(fs, seed, c)| {
            use rand::Rng;
            let mut r = rng::stream(seed, 0);
            let slopes = fs.iter().map(|_| r.random_range(-1.0..1.0)).collect();
            RegressionModel::from_raw(fs, slopes, c).unwrap()
        })
}

fn config() -> impl Strategy<Value = SearchConfig> {
    (
        prop_oneof![Just(Mode::Minimize), Just(Mode::Maximize)],
        1e-3..0.05f64,
        any::<u64>(),
        proptest::sample::subsequence(OpKind::ALL.to_vec(), 1..=4),
    )
        .prop_map(|(mode, epsilon, seed, operators)| SearchConfig {
            mode,
            epsilon,
            seed,
            operators,
            max_steps: 6,
            max_proposals_per_step: 40,
            ..SearchConfig::default()
        })
}

fn sorted_degrees(g: &Graph) -> Vec<usize> {
    let mut d = g.degree_sequence();
    d.sort_unstable();
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traces_follow_the_acceptance_rule(g in connected_graph(5, 12), m in model(), cfg in config()) {
        let t = search(&g, &m, &cfg).unwrap();
        let graphs = t.graphs().unwrap();
        prop_assert_eq!(graphs.len(), t.steps.len() + 1);
        prop_assert_eq!(graphs.last().unwrap(), &t.final_graph);
        let mut prev = t.initial_predicted;
        for (s, pair) in t.steps.iter().zip(graphs.windows(2)) {
            let (before, after) = (&pair[0], &pair[1]);
            prop_assert!(after.is_connected());
            prop_assert_eq!(&Graph::parse_edge_list(&after.to_edge_list_string()).unwrap(), after);
            prop_assert!(cfg.operators.contains(&s.op.kind));
            let dm = after.edge_count() as i64 - before.edge_count() as i64;
            match s.op.kind {
                OpKind::AddEdge => prop_assert_eq!(dm, 1),
                OpKind::RemoveEdge => prop_assert_eq!(dm, -1),
                OpKind::DoubleSwap | OpKind::RandomRewire => prop_assert_eq!(dm, 0),
            }
            prop_assert!(cfg.accepts(prev, s.predicted), "{} -> {}", prev, s.predicted);
            let gain = match cfg.mode {
                Mode::Minimize => prev - s.predicted,
                Mode::Maximize => s.predicted - prev,
            };
            prop_assert!(gain > 0.0 && gain >= cfg.epsilon * prev.abs());
            prop_assert_eq!(predict_graph(&m, after, cfg.feature_seed).unwrap(), s.predicted);
            prev = s.predicted;
        }
    }

    #[test]
    fn searches_are_reproducible(g in connected_graph(5, 12), m in model(), cfg in config()) {
        let a = search(&g, &m, &cfg).unwrap();
        let b = search(&g, &m, &cfg).unwrap();
        prop_assert!(a.same_path(&b));
        prop_assert_eq!(a.status, b.status);
    }

    #[test]
    fn swap_only_search_keeps_the_degree_sequence(g in connected_graph(6, 14), m in model(), mut cfg in config()) {
        cfg.operators = vec![OpKind::DoubleSwap];
        let t = search(&g, &m, &cfg).unwrap();
        let want = sorted_degrees(&g);
        for h in t.graphs().unwrap() {
            prop_assert_eq!(sorted_degrees(&h), want.clone());
        }
    }

    #[test]
    fn proposals_keep_graphs_simple_and_connected(g in connected_graph(4, 14), seed in any::<u64>()) {
        let mut r = rng::stream(seed, 0);
        for kind in OpKind::ALL {
            if let Ok((op, h)) = propose(&g, kind, &mut r, 50) {
                prop_assert!(h.is_connected());
                prop_assert_eq!(op.apply(&g).unwrap(), h.clone());
                if kind == OpKind::DoubleSwap {
                    prop_assert_eq!(sorted_degrees(&h), sorted_degrees(&g));
                }
            }
        }
    }
}
