use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BetweennessMetrics<T> {
    pub average_node_betweenness: T,
    pub average_edge_betweenness: T,
    pub central_point_of_dominance: T,
    /// Node betweenness normalised by `2 / ((n-1)(n-2))`.
    pub node: Vec<T>,
    /// Edge betweenness normalised by `2 / (n(n-1))`, in [`Graph::edges`] order.
    pub edge: Vec<T>,
}

/// Unnormalised node and edge betweenness over unordered pairs, by Brandes'
/// dependency accumulation.
pub(crate) fn brandes<T: Scalar>(g: &Graph) -> (Vec<T>, Vec<T>) {
    let n = g.node_count();
    let mut edge_index = vec![usize::MAX; n * n];
    for (i, (u, v)) in g.edges().enumerate() {
        edge_index[u * n + v] = i;
        edge_index[v * n + u] = i;
    }
    let mut node = vec![T::zero(); n];
    let mut edge = vec![T::zero(); g.edge_count()];

    let mut order = Vec::with_capacity(n);
    let mut dist = vec![-1i64; n];
    let mut sigma = vec![T::zero(); n];
    let mut delta = vec![T::zero(); n];
    for s in 0..n {
        order.clear();
        dist.fill(-1);
        sigma.fill(T::zero());
        delta.fill(T::zero());
        dist[s] = 0;
        sigma[s] = T::one();
        order.push(s);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &v in g.neighbors(u) {
                if dist[v] < 0 {
                    dist[v] = dist[u] + 1;
                    order.push(v);
                }
                if dist[v] == dist[u] + 1 {
                    let su = sigma[u];
                    sigma[v] += su;
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in g.neighbors(w) {
                if dist[v] >= 0 && dist[v] + 1 == dist[w] {
                    let c = sigma[v] / sigma[w] * (T::one() + delta[w]);
                    edge[edge_index[v * n + w]] += c;
                    delta[v] += c;
                }
            }
            if w != s {
                node[w] += delta[w];
            }
        }
    }
    let half = T::lit(0.5);
    node.iter_mut().for_each(|x| *x *= half);
    edge.iter_mut().for_each(|x| *x *= half);
    (node, edge)
}

/// Node and edge betweenness averages plus the central point of dominance
/// `Σ_i (max_j C_B(j) − C_B(i)) / (n − 1)` on normalised node betweenness.
pub fn betweenness_metrics<T: Scalar>(g: &Graph) -> Result<BetweennessMetrics<T>> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::TooSmall { need: 3, got: n });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let (mut node, mut edge) = brandes::<T>(g);
    let node_scale = T::lit(2.0) / T::from_count((n - 1) * (n - 2));
    let edge_scale = T::lit(2.0) / T::from_count(n * (n - 1));
    node.iter_mut().for_each(|x| *x *= node_scale);
    edge.iter_mut().for_each(|x| *x *= edge_scale);
    let max = node.iter().copied().fold(T::zero(), T::max);
    let dominance = node.iter().map(|&x| max - x).sum::<T>() / T::from_count(n - 1);
    let avg_node = node.iter().copied().sum::<T>() / T::from_count(n);
    let avg_edge = if edge.is_empty() {
        T::zero()
    } else {
        edge.iter().copied().sum::<T>() / T::from_count(edge.len())
    };
    Ok(BetweennessMetrics {
        average_node_betweenness: avg_node,
        average_edge_betweenness: avg_edge,
        central_point_of_dominance: dominance,
        node,
        edge,
    })
}
