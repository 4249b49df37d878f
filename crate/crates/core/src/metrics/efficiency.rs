use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, Graph};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficiencyMetrics<T> {
    pub local_efficiency: T,
    pub global_efficiency: T,
}

fn global_efficiency_of<T: Scalar>(d: &DistanceMatrix) -> T {
    let n = d.node_count();
    if n < 2 {
        return T::zero();
    }
    let mut sum = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            if let Some(x) = d.get(i, j) {
                sum += T::one() / T::from_u32(x).expect("representable");
            }
        }
    }
    sum / T::from_count(n * (n - 1) / 2)
}

/// Global efficiency (mean inverse distance over node pairs, unreachable
/// pairs counting 0) and local efficiency (mean over nodes of the global
/// efficiency of the subgraph induced by the node's neighbors, 0 when it has
/// fewer than two neighbors).
pub fn efficiency_metrics<T: Scalar>(g: &Graph, d: &DistanceMatrix) -> Result<EfficiencyMetrics<T>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    let mut local = T::zero();
    for u in 0..n {
        let ns = g.neighbors(u);
        if ns.len() < 2 {
            continue;
        }
        let sub = g.induced_subgraph(ns);
        if sub.is_complete() {
            local += T::one();
        } else {
            local += global_efficiency_of::<T>(&sub.all_pairs_shortest_paths());
        }
    }
    Ok(EfficiencyMetrics {
        local_efficiency: local / T::from_count(n),
        global_efficiency: global_efficiency_of(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(g: &Graph) -> EfficiencyMetrics<f64> {
        efficiency_metrics(g, &g.all_pairs_shortest_paths()).unwrap()
    }

    #[test]
    fn fixtures() {
        let k5 = metrics(&Graph::complete(5));
        assert_eq!((k5.local_efficiency, k5.global_efficiency), (1.0, 1.0));
        let star = metrics(&Graph::star(5));
        assert!((star.global_efficiency - 0.7).abs() < 1e-15);
        assert_eq!(star.local_efficiency, 0.0);
        let p3 = metrics(&Graph::path(3));
        assert!((p3.global_efficiency - 2.5 / 3.0).abs() < 1e-15);
    }
}
