//! Simple undirected graphs on dense node ids `0..n`.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Simple undirected graph.
///
/// Stores sorted neighbor lists for iteration plus a bit matrix for constant
/// time edge tests. Values are treated as immutable once built; rewiring
/// produces new graphs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    m: usize,
    adj: Vec<Vec<usize>>,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            m: 0,
            adj: vec![Vec::new(); n],
            words,
            bits: vec![0; words * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        if n >= 3 {
            for u in 0..n {
                g.insert_edge(u, (u + 1) % n);
            }
        } else if n == 2 {
            g.insert_edge(0, 1);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 1..n {
            g.insert_edge(u - 1, u);
        }
        g
    }

    /// Star with center 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for v in 1..n {
            g.insert_edge(0, v);
        }
        g
    }

    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            if g.has_edge(u, v) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_edges(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_complete(&self) -> bool {
        self.m == self.max_edges()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Node pairs `(u, v)`, `u < v`, that are not edges.
    pub fn non_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            (u + 1..self.n)
                .filter(move |&v| !self.has_edge(u, v))
                .map(move |v| (u, v))
        })
    }

    pub(crate) fn insert_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && !self.has_edge(u, v));
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
        let pos = self.adj[u].partition_point(|&x| x < v);
        self.adj[u].insert(pos, v);
        let pos = self.adj[v].partition_point(|&x| x < u);
        self.adj[v].insert(pos, u);
        self.m += 1;
    }

    pub(crate) fn delete_edge(&mut self, u: usize, v: usize) {
        debug_assert!(self.has_edge(u, v));
        self.bits[u * self.words + v / 64] &= !(1 << (v % 64));
        self.bits[v * self.words + u / 64] &= !(1 << (u % 64));
        let pos = self.adj[u].binary_search(&v).expect("edge present");
        self.adj[u].remove(pos);
        let pos = self.adj[v].binary_search(&u).expect("edge present");
        self.adj[v].remove(pos);
        self.m -= 1;
    }

    /// Copy with edge `(u, v)` added.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Graph> {
        if u >= self.n || v >= self.n || u == v || self.has_edge(u, v) {
            return Err(Error::InvalidGraph(format!("cannot add edge ({u}, {v})")));
        }
        let mut g = self.clone();
        g.insert_edge(u, v);
        Ok(g)
    }

    /// Copy with edge `(u, v)` removed.
    pub fn without_edge(&self, u: usize, v: usize) -> Result<Graph> {
        if u >= self.n || v >= self.n || !self.has_edge(u, v) {
            return Err(Error::InvalidGraph(format!("no edge ({u}, {v})")));
        }
        let mut g = self.clone();
        g.delete_edge(u, v);
        Ok(g)
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::with_capacity(self.n);
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes are reached");
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn all_pairs_shortest_paths(&self) -> DistanceMatrix {
        let mut d = Vec::with_capacity(self.n * self.n);
        for s in 0..self.n {
            d.extend(self.bfs_distances(s));
        }
        DistanceMatrix { n: self.n, d }
    }

    /// True iff every node is reachable from node 0. A single node is
    /// connected; the null graph is not.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Bridges `(u, v)`, `u < v`, found by an iterative low-link DFS.
    pub fn bridges(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut out = Vec::new();
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // (node, parent, next neighbor index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(top) = stack.len().checked_sub(1) {
                let (u, parent, idx) = stack[top];
                if idx < self.adj[u].len() {
                    let v = self.adj[u][idx];
                    stack[top].2 += 1;
                    if v == parent {
                        continue;
                    }
                    if disc[v] == usize::MAX {
                        disc[v] = timer;
                        low[v] = timer;
                        timer += 1;
                        stack.push((v, u, 0));
                    } else {
                        low[u] = low[u].min(disc[v]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            out.push((p.min(u), p.max(u)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Subgraph induced on `nodes`, relabelled to `0..nodes.len()` in the
    /// given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut g = Graph::empty(nodes.len());
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.insert_edge(a, b);
                }
            }
        }
        g
    }

    /// Writes the canonical edge-list text format: `n m` then one `u v`
    /// line per edge with `u < v`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.n, self.m)?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "missing `n m` header".into(),
        })?;
        let header = header?;
        let (n, m) = parse_pair(&header, line_no)?;
        let mut edges = Vec::with_capacity(m);
        for (line_no, line) in lines {
            let line = line?;
            let (u, v) = parse_pair(&line, line_no)?;
            if u >= v {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("edge `{u} {v}` must satisfy u < v"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, edges)
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        Graph::read_edge_list(text.as_bytes())
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line: line_no,
                reason: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: line_no,
                reason: format!("{e}"),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            reason: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Dense all-pairs hop-distance matrix.
///
/// Unreachable pairs hold `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Option<u32>>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.d[i * self.n + j]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Option<u32>] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn all_finite(&self) -> bool {
        self.d.iter().all(Option::is_some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_sequences() {
        assert_eq!(Graph::complete(4).degree_sequence(), vec![3, 3, 3, 3]);
        assert_eq!(Graph::star(5).degree_sequence(), vec![4, 1, 1, 1, 1]);
        assert_eq!(Graph::empty(3).degree_sequence(), vec![0, 0, 0]);
    }

    #[test]
    fn shortest_paths_fixtures() {
        let c5 = Graph::cycle(5).all_pairs_shortest_paths();
        for i in 0..5 {
            let mut row: Vec<u32> = c5.row(i).iter().map(|d| d.unwrap()).collect();
            row.sort_unstable();
            assert_eq!(row, vec![0, 1, 1, 2, 2]);
        }
        let k4 = Graph::complete(4).all_pairs_shortest_paths();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(k4.get(i, j), Some(u32::from(i != j)));
            }
        }
        let two = Graph::empty(2).all_pairs_shortest_paths();
        assert_eq!(two.get(0, 1), None);
        assert_eq!(two.get(1, 0), None);
        assert_eq!(two.get(0, 0), Some(0));
    }

    #[test]
    fn connectivity() {
        assert!(Graph::cycle(5).is_connected());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(Graph::empty(1).is_connected());
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn bridges_of_triangle_with_tail() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(g.bridges(), vec![(2, 3), (3, 4)]);
        assert!(Graph::cycle(6).bridges().is_empty());
        assert_eq!(Graph::path(4).bridges().len(), 3);
    }

    #[test]
    fn edge_list_format() {
        let g = Graph::cycle(4);
        let text = g.to_edge_list_string();
        assert_eq!(text, "4 4\n0 1\n0 3\n1 2\n2 3\n");
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        assert!(Graph::parse_edge_list("3 1\n2 1\n").is_err());
        assert!(Graph::parse_edge_list("3 2\n0 1\n").is_err());
    }
}
