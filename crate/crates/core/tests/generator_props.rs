use graphnas_core::generators::{heterogeneity_augment, ws_flex_sweep};
use graphnas_core::{generate, Generator, GeneratorSpec};
use proptest::prelude::*;

fn generator() -> impl Strategy<Value = (usize, Generator)> {
    (6usize..40).prop_flat_map(|n| {
        let top = (n - 1) as f64;
        (
            Just(n),
            prop_oneof![
                (2.0..top, 0.0..=1.0f64).prop_map(|(avg_degree, p)| Generator::WsFlex { avg_degree, p }),
                (2.0..top, 0.0..=1.0f64).prop_map(|(avg_degree, p)| Generator::Ws { avg_degree, p }),
                (0.5..=1.0f64).prop_map(|p| Generator::Er { p }),
                (1..4usize).prop_map(|attach| Generator::Ba { attach }),
                (2..n.min(6)).prop_map(|k| Generator::Harary { k }),
                Just(Generator::Complete),
            ],
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_spec_same_graph((n, generator) in generator(), seed in any::<u64>()) {
        let spec = GeneratorSpec::new(n, generator, seed);
        let a = generate(&spec).unwrap();
        prop_assert!(a.is_connected());
        prop_assert_eq!(a.node_count(), n);
        prop_assert_eq!(generate(&spec).unwrap(), a);
    }

    #[test]
    fn ws_flex_lattice_is_nearly_regular(n in 6usize..60, k in 2usize..5, frac in 0.0..1.0f64) {
        let avg_degree = (k as f64 * 2.0 + frac).min((n - 1) as f64);
        let g = generate(&GeneratorSpec::new(n, Generator::WsFlex { avg_degree, p: 0.0 }, 3)).unwrap();
        let deg = g.degree_sequence();
        let (lo, hi) = (*deg.iter().min().unwrap(), *deg.iter().max().unwrap());
        prop_assert!(hi - lo <= 1, "{:?}", deg);
        prop_assert_eq!(g.edge_count(), (avg_degree * n as f64 / 2.0).floor() as usize);
        // every node keeps its ⌊k̄/2⌋ nearest neighbours on each side
        let half = (avg_degree / 2.0).floor() as usize;
        for i in 0..n {
            for s in 1..=half {
                prop_assert!(g.has_edge(i, (i + s) % n));
            }
        }
    }

    #[test]
    fn pool_graphs_are_connected_and_valid(seed in any::<u64>()) {
        let pool = ws_flex_sweep(10, 2.0, 9.0, 3, 3, 1, seed).unwrap();
        let pool = heterogeneity_augment(&pool, 2, 3, seed).unwrap();
        for e in pool.entries() {
            prop_assert!(e.graph.is_connected());
            prop_assert_eq!(e.graph.node_count(), 10);
            prop_assert_eq!(e.graph.degree_sequence().iter().sum::<usize>(), 2 * e.graph.edge_count());
        }
    }
}

#[test]
fn barabasi_albert_tail_is_power_law() {
    let g = generate(&GeneratorSpec::new(2000, Generator::Ba { attach: 2 }, 17)).unwrap();
    let k_min = 10.0;
    let tail: Vec<f64> = g
        .degree_sequence()
        .into_iter()
        .map(|d| d as f64)
        .filter(|&d| d >= k_min)
        .collect();
    assert!(tail.len() > 50, "{} tail nodes", tail.len());
    // discrete maximum-likelihood exponent
    let gamma = 1.0 + tail.len() as f64 / tail.iter().map(|d| (d / (k_min - 0.5)).ln()).sum::<f64>();
    assert!((1.5..=4.5).contains(&gamma), "gamma = {gamma}");
}
