//! Graph generators for the search space.
//!
//! Every generator is deterministic in its seed. Output that is not connected
//! is regenerated from the next sub-seed, up to [`MAX_ATTEMPTS`] times.

mod pool;

pub use pool::{heterogeneity_augment, write_atomic, ws_flex_sweep, GraphPool, PoolEntry, Provenance, MANIFEST_FILE};

use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, Rng};

pub const MAX_ATTEMPTS: u32 = 100;

/// Generator family together with its family-specific parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Generator {
    /// Watts–Strogatz: ring lattice with `⌊avg_degree / 2⌋` neighbors per
    /// side, each edge rewired with probability `p`.
    Ws {
        avg_degree: f64,
        p: f64,
    },
    /// WS-flex: ring lattice with `⌊avg_degree · n / 2⌋` edges, so node
    /// degrees may differ by one before rewiring.
    WsFlex {
        avg_degree: f64,
        p: f64,
    },
    /// Erdős–Rényi `G(n, p)`.
    Er {
        p: f64,
    },
    /// Barabási–Albert preferential attachment with `attach` edges per new node.
    Ba {
        attach: usize,
    },
    /// Harary graph `H_{k,n}`.
    Harary {
        k: usize,
    },
    Complete,
}

impl Generator {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Generator::Ws { .. } => "WS",
            Generator::WsFlex { .. } => "WS_FLEX",
            Generator::Er { .. } => "ER",
            Generator::Ba { .. } => "BA",
            Generator::Harary { .. } => "HARARY",
            Generator::Complete => "COMPLETE",
        }
    }

    /// `key=value` pairs, comma separated.
    pub fn params_string(&self) -> String {
        match *self {
            Generator::Ws { avg_degree, p } | Generator::WsFlex { avg_degree, p } => {
                format!("avg_degree={avg_degree},p={p}")
            }
            Generator::Er { p } => format!("p={p}"),
            Generator::Ba { attach } => format!("attach={attach}"),
            Generator::Harary { k } => format!("k={k}"),
            Generator::Complete => String::new(),
        }
    }

    pub fn from_parts(kind: &str, params: &str) -> Result<Generator> {
        let mut avg_degree = None;
        let mut p = None;
        let mut int = None;
        for kv in params.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param("params", format!("malformed `{kv}`")))?;
            let bad = |e: &dyn fmt::Display| Error::param("params", format!("`{kv}`: {e}"));
            match k {
                "avg_degree" => avg_degree = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
                "p" => p = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
                "attach" | "k" => int = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
                other => return Err(Error::param("params", format!("unknown key `{other}`"))),
            }
        }
        fn need<X>(x: Option<X>, kind: &str, name: &str) -> Result<X> {
            x.ok_or_else(|| Error::param("params", format!("{kind} needs `{name}`")))
        }
        Ok(match kind {
            "WS" => Generator::Ws {
                avg_degree: need(avg_degree, kind, "avg_degree")?,
                p: need(p, kind, "p")?,
            },
            "WS_FLEX" => Generator::WsFlex {
                avg_degree: need(avg_degree, kind, "avg_degree")?,
                p: need(p, kind, "p")?,
            },
            "ER" => Generator::Er { p: need(p, kind, "p")? },
            "BA" => Generator::Ba {
                attach: need(int, kind, "attach")?,
            },
            "HARARY" => Generator::Harary {
                k: need(int, kind, "k")?,
            },
            "COMPLETE" => Generator::Complete,
            other => return Err(Error::param("kind", format!("unknown generator `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub generator: Generator,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(n: usize, generator: Generator, seed: u64) -> Self {
        GeneratorSpec { n, generator, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::param("n", format!("need n >= 2, got {n}")));
        }
        let prob = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::param("p", format!("{p} outside [0, 1]")))
            }
        };
        match self.generator {
            Generator::Ws { avg_degree, p } | Generator::WsFlex { avg_degree, p } => {
                if !(2.0..=(n - 1) as f64).contains(&avg_degree) {
                    return Err(Error::param(
                        "avg_degree",
                        format!("{avg_degree} outside [2, {}]", n - 1),
                    ));
                }
                prob(p)
            }
            Generator::Er { p } => prob(p),
            Generator::Ba { attach } => {
                if attach == 0 || attach >= n {
                    Err(Error::param("attach", format!("need 1 <= attach < n, got {attach}")))
                } else {
                    Ok(())
                }
            }
            Generator::Harary { k } => {
                if k == 0 || k >= n {
                    Err(Error::param("k", format!("need 1 <= k < n, got {k}")))
                } else {
                    Ok(())
                }
            }
            Generator::Complete => Ok(()),
        }
    }
}

/// Generates a connected simple graph from `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.n;
    match spec.generator {
        Generator::Harary { k } => {
            let g = harary(n, k);
            return if g.is_connected() {
                Ok(g)
            } else {
                Err(Error::GenerationFailed { attempts: 1 })
            };
        }
        Generator::Complete => return Ok(Graph::complete(n)),
        _ => {}
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng::stream(spec.seed, u64::from(attempt));
        let g = match spec.generator {
            Generator::Ws { avg_degree, p } => {
                let half = (avg_degree / 2.0).floor() as usize;
                let mut g = Graph::empty(n);
                let lattice = ring_lattice(&mut g, half);
                rewire_lattice(&mut g, &lattice, p, &mut rng);
                g
            }
            Generator::WsFlex { avg_degree, p } => ws_flex(n, avg_degree, p, &mut rng),
            Generator::Er { p } => erdos_renyi(n, p, &mut rng),
            Generator::Ba { attach } => barabasi_albert(n, attach, &mut rng),
            Generator::Harary { .. } | Generator::Complete => unreachable!(),
        };
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_ATTEMPTS })
}

/// Adds `half` nearest neighbors per side to every node; returns the added
/// edges as `(u, u + j)` in insertion order.
fn ring_lattice(g: &mut Graph, half: usize) -> Vec<(usize, usize)> {
    let n = g.node_count();
    let mut added = Vec::with_capacity(n * half);
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            if u != v && !g.has_edge(u, v) {
                g.insert_edge(u, v);
                added.push((u, v));
            }
        }
    }
    added
}

/// WS-flex lattice: `⌊avg_degree / 2⌋` neighbors per side, then the
/// remaining `⌊avg_degree · n / 2⌋ − n·⌊avg_degree / 2⌋` edges are spread
/// one at a time over the nodes with the fewest extra edges, nearest ring
/// offset first, ties broken at random. Finally every edge is rewired with
/// probability `p`.
fn ws_flex(n: usize, avg_degree: f64, p: f64, rng: &mut Rng) -> Graph {
    let half = (avg_degree / 2.0).floor() as usize;
    let total = (avg_degree * n as f64 / 2.0).floor() as usize;
    let mut g = Graph::empty(n);
    let mut edges = ring_lattice(&mut g, half);
    let remaining = total.saturating_sub(g.edge_count());
    if remaining > 0 {
        let ring = |u: usize, v: usize| {
            let d = u.abs_diff(v);
            d.min(n - d)
        };
        let mut free: Vec<(usize, usize)> = g.non_edges().collect();
        free.shuffle(rng);
        let mut extra = vec![0usize; n];
        let mut added = Vec::with_capacity(remaining);
        for _ in 0..remaining {
            let Some((idx, &(u, v))) = free
                .iter()
                .enumerate()
                .min_by_key(|&(_, &(u, v))| (extra[u] + extra[v], ring(u, v)))
            else {
                break;
            };
            free.swap_remove(idx);
            g.insert_edge(u, v);
            added.push((u, v));
            extra[u] += 1;
            extra[v] += 1;
        }
        balance_extra(&mut g, &mut added, &mut extra, ring);
        edges.extend(added);
    }
    rewire_lattice(&mut g, &edges, p, rng);
    g
}

/// Moves endpoints of the remainder edges from the node with the most extra
/// degree to the one with the least until they differ by at most one.
fn balance_extra(
    g: &mut Graph,
    added: &mut [(usize, usize)],
    extra: &mut [usize],
    ring: impl Fn(usize, usize) -> usize,
) {
    let n = extra.len();
    for _ in 0..n * n {
        let hi = (0..n).max_by_key(|&u| (extra[u], std::cmp::Reverse(u))).unwrap_or(0);
        let lo = (0..n).min_by_key(|&u| (extra[u], u)).unwrap_or(0);
        if extra[hi] <= extra[lo] + 1 {
            return;
        }
        let movable = added
            .iter()
            .enumerate()
            .filter_map(|(i, &(a, b))| match (a == hi, b == hi) {
                (true, _) => Some((i, b)),
                (_, true) => Some((i, a)),
                _ => None,
            })
            .filter(|&(_, x)| x != lo && !g.has_edge(lo, x))
            .min_by_key(|&(_, x)| (ring(lo, x), x));
        let Some((i, x)) = movable else { return };
        g.delete_edge(hi, x);
        g.insert_edge(lo, x);
        added[i] = (lo.min(x), lo.max(x));
        extra[hi] -= 1;
        extra[lo] += 1;
    }
}

/// Watts–Strogatz rewiring: with probability `p` replace `(u, v)` by `(u, w)`
/// for a uniform `w` that is neither `u` nor a neighbor of `u`.
fn rewire_lattice(g: &mut Graph, edges: &[(usize, usize)], p: f64, rng: &mut Rng) {
    if p <= 0.0 {
        return;
    }
    let n = g.node_count();
    let mut candidates = Vec::with_capacity(n);
    for &(u, v) in edges {
        if rng.random::<f64>() >= p || !g.has_edge(u, v) {
            continue;
        }
        candidates.clear();
        candidates.extend((0..n).filter(|&w| w != u && !g.has_edge(u, w)));
        if let Some(&w) = candidates.choose(rng) {
            g.delete_edge(u, v);
            g.insert_edge(u, w);
        }
    }
}

fn erdos_renyi(n: usize, p: f64, rng: &mut Rng) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if p >= 1.0 || rng.random::<f64>() < p {
                g.insert_edge(u, v);
            }
        }
    }
    g
}

/// Preferential attachment seeded with a star on `attach + 1` nodes.
fn barabasi_albert(n: usize, attach: usize, rng: &mut Rng) -> Graph {
    let mut g = Graph::empty(n);
    let mut repeated = Vec::with_capacity(2 * n * attach);
    for v in 1..=attach {
        g.insert_edge(0, v);
        repeated.extend([0, v]);
    }
    let mut targets = Vec::with_capacity(attach);
    for source in attach + 1..n {
        targets.clear();
        while targets.len() < attach {
            let &t = repeated.choose(rng).expect("non-empty");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.insert_edge(source, t);
            repeated.push(t);
            repeated.push(source);
        }
    }
    g
}

/// Harary graph `H_{k,n}`: circulant on `⌊k/2⌋` offsets, plus diameters for
/// odd `k`. Has `⌈kn/2⌉` edges and connectivity `k`.
fn harary(n: usize, k: usize) -> Graph {
    let mut g = Graph::empty(n);
    ring_lattice(&mut g, k / 2);
    if k % 2 == 1 {
        if n.is_multiple_of(2) {
            for u in 0..n / 2 {
                let v = u + n / 2;
                if !g.has_edge(u, v) {
                    g.insert_edge(u, v);
                }
            }
        } else {
            for u in 0..=(n - 1) / 2 {
                let v = (u + n.div_ceil(2)) % n;
                if u != v && !g.has_edge(u, v) {
                    g.insert_edge(u, v);
                }
            }
        }
    }
    g
}
