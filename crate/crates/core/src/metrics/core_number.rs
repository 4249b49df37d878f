use crate::graph::Graph;
use crate::scalar::Scalar;

/// Core number of every node by bucketed minimum-degree peeling.
pub fn core_numbers(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut degree = g.degree_sequence();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for (v, &d) in degree.iter().enumerate() {
        buckets[d].push(v);
    }
    let mut removed = vec![false; n];
    let mut core = vec![0; n];
    let mut k = 0;
    let mut done = 0;
    while done < n {
        let Some(d) = (0..=max_deg).find(|&d| buckets[d].iter().any(|&v| !removed[v] && degree[v] == d)) else {
            break;
        };
        let pos = buckets[d]
            .iter()
            .position(|&v| !removed[v] && degree[v] == d)
            .expect("found above");
        let v = buckets[d].swap_remove(pos);
        k = k.max(d);
        core[v] = k;
        removed[v] = true;
        done += 1;
        for &w in g.neighbors(v) {
            if !removed[w] && degree[w] > 0 {
                degree[w] -= 1;
                buckets[degree[w]].push(w);
            }
        }
    }
    core
}

/// Mean core number over nodes.
pub fn core_number_metric<T: Scalar>(g: &Graph) -> T {
    let n = g.node_count();
    if n == 0 {
        return T::zero();
    }
    let total: usize = core_numbers(g).iter().sum();
    T::from_count(total) / T::from_count(n)
}
