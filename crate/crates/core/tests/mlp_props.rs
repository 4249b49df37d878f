mod common;

use graphnas_core::mlp::{
    count_flops, gaussian_blobs, match_flop_budget, train_toy, MaskedMlpSpec, Params, TrainConfig,
};
use graphnas_core::rng;
use proptest::prelude::*;
use rand::Rng;

use common::connected_graph;

fn spec() -> impl Strategy<Value = MaskedMlpSpec> {
    (connected_graph(2, 7), 0usize..3, 2usize..5, 1usize..4, 2usize..4).prop_map(|(g, extra, layers, dim, classes)| {
        let width = g.node_count() + extra * 3;
        MaskedMlpSpec::with_width(&g, width, layers, dim, classes).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn masked_weights_stay_zero_through_training(s in spec(), seed in any::<u64>()) {
        let data = gaussian_blobs(8, s.input_dim(), s.output_dim(), 2.0, seed);
        let (train, val) = data.split(0.25, seed);
        let cfg = TrainConfig { epochs: 3, batch_size: 5, seed, ..TrainConfig::default() };
        let out = train_toy(&s, &train, &val, &cfg).unwrap();
        prop_assert!(out.params.respects_mask(&s));
        for l in (0..s.n_layers()).filter(|&l| s.is_masked(l)) {
            let (fan_in, fan_out) = s.layer_dims(l);
            for o in 0..fan_out {
                for i in 0..fan_in {
                    if !s.weight_active(l, o, i) {
                        prop_assert_eq!(out.params.weights[l][o * fan_in + i], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn mask_follows_the_graph(s in spec()) {
        for l in 0..s.n_layers() {
            let (fan_in, fan_out) = s.layer_dims(l);
            match s.layer_mask(l) {
                None => prop_assert!(!s.is_masked(l)),
                Some(m) => {
                    prop_assert_eq!(m.len(), fan_in * fan_out);
                    for o in 0..fan_out {
                        for i in 0..fan_in {
                            let (a, b) = (s.owner(o), s.owner(i));
                            prop_assert_eq!(m[o * fan_in + i], a == b || s.graph().has_edge(a, b));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn masked_unit_depends_only_on_its_neighbourhood(g in connected_graph(2, 8), seed in any::<u64>(), bump in 0.1..2.0f64) {
        let n = g.node_count();
        let s = MaskedMlpSpec::with_width(&g, n, 3, n, 2).unwrap();
        let mut p = Params::<f64>::init(&s, seed);
        // identity first layer: masked-layer input j is network input j
        p.weights[0] = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
        p.biases[0] = vec![0.0; n];
        let mut r = rng::stream(seed, 1);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
        let base = p.forward(&s, &x).unwrap();
        for j in 0..n {
            let mut y = x.clone();
            y[j] += bump;
            let moved = p.forward(&s, &y).unwrap();
            for i in 0..n {
                let same = base.pre[1][i] == moved.pre[1][i];
                if i != j && !g.has_edge(i, j) {
                    prop_assert!(same, "unit {} moved with input {}", i, j);
                }
            }
        }
    }

    #[test]
    fn adding_an_edge_never_lowers_flops(g in connected_graph(3, 10), units in 1usize..4, pick in any::<prop::sample::Index>()) {
        let non_edges: Vec<(usize, usize)> = g.non_edges().collect();
        prop_assume!(!non_edges.is_empty());
        let (u, v) = non_edges[pick.index(non_edges.len())];
        let h = g.with_edge(u, v).unwrap();
        let w = g.node_count() * units;
        let a = count_flops(&MaskedMlpSpec::with_width(&g, w, 4, 5, 3).unwrap());
        let b = count_flops(&MaskedMlpSpec::with_width(&h, w, 4, 5, 3).unwrap());
        prop_assert!(b > a);
    }

    #[test]
    fn matched_width_is_the_closest(g in connected_graph(3, 10), budget in 2_000u64..200_000) {
        let s = match_flop_budget(&g, graphnas_core::mlp::FlopBudget(budget), 4, 5, 3).unwrap();
        let w = s.hidden_width();
        let flops = |w: usize| count_flops(&MaskedMlpSpec::with_width(&g, w, 4, 5, 3).unwrap()).0;
        let gap = |f: u64| f.abs_diff(budget);
        let chosen = gap(flops(w));
        if w > g.node_count() {
            prop_assert!(chosen <= gap(flops(w - 1)));
        }
        prop_assert!(chosen <= gap(flops(w + 1)));
    }
}
