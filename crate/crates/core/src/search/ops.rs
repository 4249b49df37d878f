//! The four rewiring operators.

use std::collections::HashSet;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Resampling budget for operand draws that can fail validation.
pub const DEFAULT_OPERATOR_RETRIES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    AddEdge,
    RemoveEdge,
    DoubleSwap,
    RandomRewire,
}

impl OpKind {
    pub const ALL: [OpKind; 4] = [
        OpKind::AddEdge,
        OpKind::RemoveEdge,
        OpKind::DoubleSwap,
        OpKind::RandomRewire,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::AddEdge => "add_edge",
            OpKind::RemoveEdge => "remove_edge",
            OpKind::DoubleSwap => "double_swap",
            OpKind::RandomRewire => "random_rewire",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("op_kind", format!("unknown operator `{s}`")))
    }
}

/// A concrete rewiring: edges taken out, then edges put in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewireOp {
    pub kind: OpKind,
    pub removed: Vec<(usize, usize)>,
    pub added: Vec<(usize, usize)>,
}

impl RewireOp {
    /// Applies the op to `g`, checking that every removed edge exists, every
    /// added edge does not, and the result stays connected.
    pub fn apply(&self, g: &Graph) -> Result<Graph> {
        let n = g.node_count();
        let mut out = g.clone();
        for &(u, v) in &self.removed {
            if u >= n || v >= n || !out.has_edge(u, v) {
                return Err(Error::InvalidGraph(format!("{}: ({u}, {v}) is not an edge", self.kind)));
            }
            out.delete_edge(u, v);
        }
        for &(u, v) in &self.added {
            if u == v || u >= n || v >= n || out.has_edge(u, v) {
                return Err(Error::InvalidGraph(format!("{}: cannot add ({u}, {v})", self.kind)));
            }
            out.insert_edge(u, v);
        }
        if !out.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(out)
    }
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Draws one operation of `kind` that keeps `g` simple and connected.
///
/// ADD_EDGE picks a uniform non-edge and REMOVE_EDGE a uniform non-bridge
/// edge. DOUBLE_SWAP turns `(u,v),(x,y)` into `(u,x),(v,y)` and
/// RANDOM_REWIRE turns `(u,v)` into `(u,w)`; both resample up to `retries`
/// times before giving up with [`Error::NotApplicable`].
pub fn propose<R: Rng + ?Sized>(g: &Graph, kind: OpKind, rng: &mut R, retries: usize) -> Result<(RewireOp, Graph)> {
    let n = g.node_count();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let na = || Error::NotApplicable(kind);
    match kind {
        OpKind::AddEdge => {
            let non_edges: Vec<(usize, usize)> = g.non_edges().collect();
            let &(u, v) = non_edges.choose(rng).ok_or_else(na)?;
            let op = RewireOp {
                kind,
                removed: vec![],
                added: vec![(u, v)],
            };
            let out = op.apply(g)?;
            Ok((op, out))
        }
        OpKind::RemoveEdge => {
            let bridges: HashSet<(usize, usize)> = g.bridges().into_iter().map(|(u, v)| ordered(u, v)).collect();
            let safe: Vec<(usize, usize)> = edges.iter().copied().filter(|e| !bridges.contains(e)).collect();
            let &(u, v) = safe.choose(rng).ok_or_else(na)?;
            let op = RewireOp {
                kind,
                removed: vec![(u, v)],
                added: vec![],
            };
            let out = op.apply(g)?;
            Ok((op, out))
        }
        OpKind::DoubleSwap => {
            if edges.len() < 2 {
                return Err(na());
            }
            for _ in 0..retries {
                let a = rng.random_range(0..edges.len());
                let b = rng.random_range(0..edges.len());
                if a == b {
                    continue;
                }
                let (mut u, mut v) = edges[a];
                if rng.random::<bool>() {
                    std::mem::swap(&mut u, &mut v);
                }
                let (mut x, mut y) = edges[b];
                if rng.random::<bool>() {
                    std::mem::swap(&mut x, &mut y);
                }
                let distinct = u != x && u != y && v != x && v != y;
                if !distinct || g.has_edge(u, x) || g.has_edge(v, y) {
                    continue;
                }
                let op = RewireOp {
                    kind,
                    removed: vec![edges[a], edges[b]],
                    added: vec![ordered(u, x), ordered(v, y)],
                };
                if let Ok(out) = op.apply(g) {
                    return Ok((op, out));
                }
            }
            Err(na())
        }
        OpKind::RandomRewire => {
            if edges.is_empty() || n < 3 {
                return Err(na());
            }
            for _ in 0..retries {
                let (mut u, mut v) = *edges.choose(rng).expect("non-empty");
                if rng.random::<bool>() {
                    std::mem::swap(&mut u, &mut v);
                }
                let w = rng.random_range(0..n);
                if w == u || g.has_edge(u, w) {
                    continue;
                }
                let op = RewireOp {
                    kind,
                    removed: vec![ordered(u, v)],
                    added: vec![ordered(u, w)],
                };
                if let Ok(out) = op.apply(g) {
                    return Ok((op, out));
                }
            }
            Err(na())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn add_on_complete_is_not_applicable() {
        let mut r = rng::stream(0, 0);
        let err = propose(&Graph::complete(5), OpKind::AddEdge, &mut r, 10).unwrap_err();
        assert!(matches!(err, Error::NotApplicable(OpKind::AddEdge)));
    }

    #[test]
    fn remove_on_tree_is_not_applicable() {
        let mut r = rng::stream(0, 0);
        assert!(propose(&Graph::star(6), OpKind::RemoveEdge, &mut r, 10).is_err());
    }

    #[test]
    fn remove_on_c4_gives_path() {
        let mut r = rng::stream(3, 0);
        let (op, out) = propose(&Graph::cycle(4), OpKind::RemoveEdge, &mut r, 10).unwrap();
        assert_eq!(op.removed.len(), 1);
        assert_eq!(out.edge_count(), 3);
        assert!(out.is_connected());
        let mut degs = out.degree_sequence();
        degs.sort();
        assert_eq!(degs, vec![1, 1, 2, 2]);
    }

    #[test]
    fn swap_preserves_degrees_and_rewire_preserves_m() {
        let g = Graph::cycle(10).with_edge(0, 5).unwrap();
        let mut r = rng::stream(1, 0);
        for _ in 0..50 {
            let (_, s) = propose(&g, OpKind::DoubleSwap, &mut r, 200).unwrap();
            assert_eq!(s.degree_sequence(), g.degree_sequence());
            let (_, w) = propose(&g, OpKind::RandomRewire, &mut r, 200).unwrap();
            assert_eq!(w.edge_count(), g.edge_count());
            assert!(w.is_connected());
        }
    }

    #[test]
    fn apply_replays() {
        let g = Graph::cycle(8);
        let mut r = rng::stream(2, 0);
        for kind in OpKind::ALL {
            let (op, out) = propose(&g, kind, &mut r, 200).unwrap();
            assert_eq!(op.apply(&g).unwrap(), out);
            assert_eq!(op.kind.to_string().parse::<OpKind>().unwrap(), kind);
        }
    }
}
