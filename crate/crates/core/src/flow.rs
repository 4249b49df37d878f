//! Unit-capacity max-flow for local node connectivity and edge connectivity.

use crate::graph::Graph;

/// Dinic max-flow over an adjacency-array residual network.
#[derive(Clone, Debug)]
struct FlowNetwork {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u32>,
    initial: Vec<u32>,
    level: Vec<i32>,
    iter: Vec<usize>,
    queue: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![NIL; nodes],
            next: Vec::new(),
            to: Vec::new(),
            cap: Vec::new(),
            initial: Vec::new(),
            level: vec![-1; nodes],
            iter: vec![NIL; nodes],
            queue: Vec::with_capacity(nodes),
        }
    }

    /// Adds arc `u -> v` with capacity `forward` and its reverse with
    /// capacity `backward`.
    fn add_arc_pair(&mut self, u: usize, v: usize, forward: u32, backward: u32) {
        for (a, b, c) in [(u, v, forward), (v, u, backward)] {
            self.to.push(b);
            self.cap.push(c);
            self.initial.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    fn reset(&mut self) {
        self.cap.copy_from_slice(&self.initial);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.queue.clear();
        self.level[s] = 0;
        self.queue.push(s);
        let mut qi = 0;
        while qi < self.queue.len() {
            let u = self.queue[qi];
            qi += 1;
            let mut e = self.head[u];
            while e != NIL {
                let v = self.to[e];
                if self.cap[e] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    self.queue.push(v);
                }
                e = self.next[e];
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize) -> bool {
        if u == t {
            return true;
        }
        while self.iter[u] != NIL {
            let e = self.iter[u];
            let v = self.to[e];
            if self.cap[e] > 0 && self.level[v] == self.level[u] + 1 && self.dfs(v, t) {
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                return true;
            }
            self.iter[u] = self.next[e];
        }
        false
    }

    /// Max flow from `s` to `t`, stopping early once `limit` is reached.
    fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        self.reset();
        let mut flow = 0;
        while flow < limit && self.bfs(s, t) {
            self.iter.copy_from_slice(&self.head);
            while flow < limit && self.dfs(s, t) {
                flow += 1;
            }
        }
        flow
    }
}

/// Node-split network reused across all source/sink pairs of one graph.
///
/// Node `v` becomes `v_in = 2v` and `v_out = 2v + 1` joined by a unit arc, so
/// a unit flow from `s_out` to `t_in` is a set of internally node-disjoint
/// paths. A direct edge `s–t` contributes one path.
#[derive(Clone, Debug)]
pub struct VertexConnectivity<'g> {
    graph: &'g Graph,
    net: FlowNetwork,
}

impl<'g> VertexConnectivity<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        let n = graph.node_count();
        let mut net = FlowNetwork::new(2 * n);
        for v in 0..n {
            net.add_arc_pair(2 * v, 2 * v + 1, 1, 0);
        }
        for (u, v) in graph.edges() {
            net.add_arc_pair(2 * u + 1, 2 * v, 1, 0);
            net.add_arc_pair(2 * v + 1, 2 * u, 1, 0);
        }
        VertexConnectivity { graph, net }
    }

    /// Maximum number of internally node-disjoint `s`–`t` paths.
    pub fn local(&mut self, s: usize, t: usize) -> u32 {
        assert_ne!(s, t, "source and sink must differ");
        let bound = self.graph.degree(s).min(self.graph.degree(t)) as u32;
        if bound == 0 {
            return 0;
        }
        self.net.max_flow(2 * s + 1, 2 * t, bound)
    }
}

/// Maximum number of internally node-disjoint paths between `s` and `t`.
pub fn max_flow_vertex_connectivity(g: &Graph, s: usize, t: usize) -> u32 {
    VertexConnectivity::new(g).local(s, t)
}

/// Minimum number of edges whose removal disconnects `g`, as the minimum of
/// `n - 1` edge max-flows from node 0.
pub fn edge_connectivity(g: &Graph) -> u32 {
    let n = g.node_count();
    if n < 2 || !g.is_connected() {
        return 0;
    }
    let mut net = FlowNetwork::new(n);
    for (u, v) in g.edges() {
        net.add_arc_pair(u, v, 1, 1);
    }
    let mut best = (0..n).map(|v| g.degree(v)).min().unwrap_or(0) as u32;
    for t in 1..n {
        if best == 0 {
            break;
        }
        best = best.min(net.max_flow(0, t, best));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_connectivity_fixtures() {
        let k4 = Graph::complete(4);
        let c5 = Graph::cycle(5);
        let p3 = Graph::path(3);
        let mut vk = VertexConnectivity::new(&k4);
        let mut vc = VertexConnectivity::new(&c5);
        for s in 0..4 {
            for t in 0..4 {
                if s != t {
                    assert_eq!(vk.local(s, t), 3);
                }
            }
        }
        for s in 0..5 {
            for t in 0..5 {
                if s != t {
                    assert_eq!(vc.local(s, t), 2);
                }
            }
        }
        assert_eq!(max_flow_vertex_connectivity(&p3, 0, 2), 1);
    }

    #[test]
    fn edge_connectivity_fixtures() {
        assert_eq!(edge_connectivity(&Graph::cycle(6)), 2);
        assert_eq!(edge_connectivity(&Graph::complete(4)), 3);
        assert_eq!(edge_connectivity(&Graph::path(3)), 1);
        assert_eq!(edge_connectivity(&Graph::empty(3)), 0);
    }
}
