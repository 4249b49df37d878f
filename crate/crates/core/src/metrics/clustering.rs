use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusteringMetrics<T> {
    pub clustering_coefficient: T,
    pub transitivity: T,
}

/// Triangles through each node.
pub(crate) fn triangles_per_node(g: &Graph) -> Vec<usize> {
    (0..g.node_count())
        .map(|u| {
            let ns = g.neighbors(u);
            let mut t = 0;
            for (a, &v) in ns.iter().enumerate() {
                for &w in &ns[a + 1..] {
                    if g.has_edge(v, w) {
                        t += 1;
                    }
                }
            }
            t
        })
        .collect()
}

/// Mean local clustering (0 for nodes of degree < 2) and
/// `3 · triangles / wedges` (0 without wedges).
pub fn clustering_and_transitivity<T: Scalar>(g: &Graph) -> ClusteringMetrics<T> {
    let n = g.node_count();
    if n == 0 {
        return ClusteringMetrics {
            clustering_coefficient: T::zero(),
            transitivity: T::zero(),
        };
    }
    let tri = triangles_per_node(g);
    let mut local = T::zero();
    let mut wedges = 0usize;
    for (u, &t) in tri.iter().enumerate() {
        let k = g.degree(u);
        let pairs = k * k.saturating_sub(1) / 2;
        wedges += pairs;
        if pairs > 0 {
            local += T::from_count(t) / T::from_count(pairs);
        }
    }
    let closed: usize = tri.iter().sum();
    ClusteringMetrics {
        clustering_coefficient: local / T::from_count(n),
        transitivity: if wedges == 0 {
            T::zero()
        } else {
            T::from_count(closed) / T::from_count(wedges)
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let k4 = clustering_and_transitivity::<f64>(&Graph::complete(4));
        assert_eq!((k4.clustering_coefficient, k4.transitivity), (1.0, 1.0));
        let star = clustering_and_transitivity::<f64>(&Graph::star(5));
        assert_eq!((star.clustering_coefficient, star.transitivity), (0.0, 0.0));
        let paw = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let m = clustering_and_transitivity::<f64>(&paw);
        assert!((m.transitivity - 0.6).abs() < 1e-15);
    }
}
