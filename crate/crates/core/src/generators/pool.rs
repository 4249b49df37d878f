use std::collections::HashSet;
use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::RngCore;
use rayon::prelude::*;

use super::{generate, Generator, GeneratorSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, Rng};

pub const MANIFEST_FILE: &str = "pool.manifest";

/// Where a pool graph came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Generated(GeneratorSpec),
    /// Endpoint-rewired copy of pool graph `parent`.
    Rewired {
        parent: usize,
        moves: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry {
    pub id: usize,
    pub graph: Graph,
    pub provenance: Provenance,
}

/// Ordered graph collection with dense ids `0..len`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphPool {
    entries: Vec<PoolEntry>,
}

impl GraphPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, graph: Graph, provenance: Provenance) -> usize {
        let id = self.entries.len();
        self.entries.push(PoolEntry { id, graph, provenance });
        id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn get(&self, id: usize) -> Option<&PoolEntry> {
        self.entries.get(id)
    }

    pub fn graphs(&self) -> impl Iterator<Item = &Graph> {
        self.entries.iter().map(|e| &e.graph)
    }

    /// Number of pairwise distinct edge sets.
    pub fn distinct_count(&self) -> usize {
        self.graphs().collect::<HashSet<_>>().len()
    }

    /// Writes `pool.manifest` plus one `<id>.edges` file per graph.
    ///
    /// Manifest lines are tab separated: `id kind params seed`. Rewired
    /// graphs use kind `REWIRED` with params `parent=<id>,moves=<k>`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut manifest = String::new();
        for e in &self.entries {
            let (kind, params, seed) = match &e.provenance {
                Provenance::Generated(spec) => (
                    spec.generator.kind_name().to_string(),
                    spec.generator.params_string(),
                    spec.seed,
                ),
                Provenance::Rewired { parent, moves, seed } => {
                    ("REWIRED".to_string(), format!("parent={parent},moves={moves}"), *seed)
                }
            };
            manifest.push_str(&format!("{}\t{kind}\t{params}\t{seed}\n", e.id));
            write_atomic(
                &dir.join(format!("{}.edges", e.id)),
                e.graph.to_edge_list_string().as_bytes(),
            )?;
        }
        write_atomic(&dir.join(MANIFEST_FILE), manifest.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<GraphPool> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let mut pool = GraphPool::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| Error::Parse { line: line_no, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 tab-separated fields, got {}", fields.len())));
            }
            let id: usize = fields[0].parse().map_err(|e| bad(format!("id: {e}")))?;
            if id != pool.len() {
                return Err(bad(format!("ids must be dense, expected {}", pool.len())));
            }
            let seed: u64 = fields[3].parse().map_err(|e| bad(format!("seed: {e}")))?;
            let file = fs::File::open(dir.join(format!("{id}.edges")))?;
            let graph = Graph::read_edge_list(BufReader::new(file))?;
            let provenance = if fields[1] == "REWIRED" {
                let mut parent = None;
                let mut moves = None;
                for kv in fields[2].split(',') {
                    match kv.split_once('=') {
                        Some(("parent", v)) => parent = v.parse().ok(),
                        Some(("moves", v)) => moves = v.parse().ok(),
                        _ => return Err(bad(format!("bad rewired params `{kv}`"))),
                    }
                }
                Provenance::Rewired {
                    parent: parent.ok_or_else(|| bad("missing parent".into()))?,
                    moves: moves.ok_or_else(|| bad("missing moves".into()))?,
                    seed,
                }
            } else {
                Provenance::Generated(GeneratorSpec {
                    n: graph.node_count(),
                    generator: Generator::from_parts(fields[1], fields[2])?,
                    seed,
                })
            };
            pool.push(graph, provenance);
        }
        Ok(pool)
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::param("path", format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Geometric grid of `steps` points from `lo` to `hi`.
pub(crate) fn geometric_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    hi
                } else {
                    lo * (hi / lo).powf(i as f64 / (steps - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Uniform grid of `steps` points on `[0, 1]`.
pub(crate) fn unit_grid(steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect(),
    }
}

/// WS-flex pool over a `degree × p × seed` grid.
///
/// Degrees are spaced geometrically in `[degree_lo, degree_hi]`, rewiring
/// probabilities uniformly in `[0, 1]`. Cell `c` draws its generator seed
/// from stream `c` of `base_seed`. Cells whose generator fails are dropped;
/// the rest keep grid order.
pub fn ws_flex_sweep(
    n: usize,
    degree_lo: f64,
    degree_hi: f64,
    degree_steps: usize,
    p_steps: usize,
    seeds_per_cell: usize,
    base_seed: u64,
) -> Result<GraphPool> {
    if !(degree_lo >= 2.0 && degree_lo < degree_hi && degree_hi <= (n as f64) - 1.0) {
        return Err(Error::param(
            "degree_range",
            format!("need 2 <= lo < hi <= n - 1, got [{degree_lo}, {degree_hi}] for n = {n}"),
        ));
    }
    let degrees = geometric_grid(degree_lo, degree_hi, degree_steps);
    let ps = unit_grid(p_steps);
    let cells: Vec<GeneratorSpec> = degrees
        .iter()
        .flat_map(|&d| ps.iter().map(move |&p| (d, p)))
        .flat_map(|(d, p)| (0..seeds_per_cell).map(move |s| (d, p, s)))
        .enumerate()
        .map(|(cell, (avg_degree, p, _))| {
            let seed = rng::stream(base_seed, cell as u64).next_u64();
            GeneratorSpec::new(n, Generator::WsFlex { avg_degree, p }, seed)
        })
        .collect();
    let graphs: Vec<Option<Graph>> = cells.par_iter().map(|spec| generate(spec).ok()).collect();
    let mut pool = GraphPool::new();
    for (spec, g) in cells.into_iter().zip(graphs) {
        if let Some(g) = g {
            pool.push(g, Provenance::Generated(spec));
        }
    }
    Ok(pool)
}

/// Moves one endpoint of a random edge to a random non-neighbor, keeping the
/// graph connected. Returns `false` if no valid move was found in `tries`.
pub(crate) fn move_random_endpoint(g: &mut Graph, rng: &mut Rng, tries: usize) -> bool {
    let n = g.node_count();
    let mut candidates = Vec::with_capacity(n);
    for _ in 0..tries {
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let Some(&(a, b)) = edges.choose(rng) else {
            return false;
        };
        let (u, v) = if rng.next_u32() & 1 == 0 { (a, b) } else { (b, a) };
        candidates.clear();
        candidates.extend((0..n).filter(|&w| w != u && !g.has_edge(u, w)));
        let Some(&w) = candidates.choose(rng) else {
            continue;
        };
        g.delete_edge(u, v);
        g.insert_edge(u, w);
        if g.is_connected() {
            return true;
        }
        g.delete_edge(u, w);
        g.insert_edge(u, v);
    }
    false
}

/// Adds rewired variants of every pool graph to raise degree heterogeneity.
///
/// For each original graph and each round `r` in `1..=rounds`, a copy
/// receives `r · rewires_per_round` endpoint moves. Originals are kept
/// unchanged at the front; variants follow in (graph, round) order.
pub fn heterogeneity_augment(
    pool: &GraphPool,
    rounds: usize,
    rewires_per_round: usize,
    seed: u64,
) -> Result<GraphPool> {
    if pool.is_empty() {
        return Err(Error::param("pool", "cannot augment an empty pool"));
    }
    let jobs: Vec<(usize, usize)> = pool
        .entries()
        .iter()
        .flat_map(|e| (1..=rounds).map(move |r| (e.id, r)))
        .collect();
    let variants: Vec<(usize, usize, u64, Graph)> = jobs
        .par_iter()
        .map(|&(parent, round)| {
            let job_seed = rng::stream(seed, ((parent as u64) << 20) | round as u64).next_u64();
            let mut rng = rng::stream(job_seed, 0);
            let mut g = pool.entries()[parent].graph.clone();
            let moves = round * rewires_per_round;
            for _ in 0..moves {
                move_random_endpoint(&mut g, &mut rng, 100);
            }
            (parent, moves, job_seed, g)
        })
        .collect();
    let mut out = pool.clone();
    for (parent, moves, seed, g) in variants {
        out.push(g, Provenance::Rewired { parent, moves, seed });
    }
    Ok(out)
}
