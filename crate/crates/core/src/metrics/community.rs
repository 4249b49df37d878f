//! Modularity, Kernighan–Lin bisection and Clauset–Newman–Moore greedy
//! agglomeration.
//!
//! All decisions are made on integers scaled by `4m²` (or `2m` for pair
//! weights) so ties are exact and results do not depend on rounding.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::scalar::Scalar;

/// Kernighan–Lin random restarts used by default.
pub const KL_RESTARTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommunityMetrics<T> {
    pub bimodularity: T,
    pub greedy_modularity: T,
}

/// `Q · 4m²` as an exact integer: `Σ_c (4m·L_c − D_c²)` with `L_c` the
/// internal edges and `D_c` the degree sum of community `c`.
pub(crate) fn modularity_numerator(g: &Graph, labels: &[usize]) -> i64 {
    let groups = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![0i64; groups];
    let mut degree = vec![0i64; groups];
    for (u, v) in g.edges() {
        if labels[u] == labels[v] {
            internal[labels[u]] += 1;
        }
    }
    for (u, &c) in labels.iter().enumerate() {
        degree[c] += g.degree(u) as i64;
    }
    let four_m = 4 * g.edge_count() as i64;
    internal.iter().zip(&degree).map(|(&l, &d)| four_m * l - d * d).sum()
}

/// Newman modularity of the partition given by `labels` (dense community
/// ids), normalised by `2m`.
pub fn modularity<T: Scalar>(g: &Graph, labels: &[usize]) -> T {
    let m = g.edge_count();
    if m == 0 {
        return T::zero();
    }
    let num = modularity_numerator(g, labels);
    let den = 4 * (m as i64) * (m as i64);
    T::from_i64(num).expect("representable") / T::from_i64(den).expect("representable")
}

/// Kernighan–Lin balanced bisection maximising modularity.
///
/// Runs KL on the pair weights `2m·A_ij − k_i k_j`: minimising their cut
/// maximises modularity over bisections with sides `⌊n/2⌋` and `⌈n/2⌉`.
/// Each restart starts from a random split drawn from stream `r` of `seed`;
/// the best bisection over `restarts` is returned as 0/1 labels.
pub fn kernighan_lin_bisection(g: &Graph, seed: u64, restarts: usize) -> Vec<usize> {
    let n = g.node_count();
    let two_m = 2 * g.edge_count() as i64;
    let deg: Vec<i64> = (0..n).map(|u| g.degree(u) as i64).collect();
    let w = |i: usize, j: usize| -> i64 {
        let a = i64::from(g.has_edge(i, j));
        two_m * a - deg[i] * deg[j]
    };
    let mut weights = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                weights[i * n + j] = w(i, j);
            }
        }
    }
    let mut best: Option<(i64, Vec<usize>)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng::stream(seed, r as u64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut side = vec![1usize; n];
        for &u in &order[..n / 2] {
            side[u] = 0;
        }
        kl_refine(&weights, n, &mut side);
        let score = modularity_numerator(g, &side);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, side));
        }
    }
    best.map(|(_, s)| s).unwrap_or_default()
}

fn kl_refine(w: &[i64], n: usize, side: &mut [usize]) {
    for _pass in 0..n.max(8) {
        let mut d = vec![0i64; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    if side[i] == side[j] {
                        d[i] -= w[i * n + j];
                    } else {
                        d[i] += w[i * n + j];
                    }
                }
            }
        }
        let mut locked = vec![false; n];
        let mut swaps = Vec::new();
        let mut gains = Vec::new();
        let mut trial = side.to_vec();
        loop {
            let mut pick: Option<(i64, usize, usize)> = None;
            for a in (0..n).filter(|&a| !locked[a] && trial[a] == 0) {
                for b in (0..n).filter(|&b| !locked[b] && trial[b] == 1) {
                    let gain = d[a] + d[b] - 2 * w[a * n + b];
                    if pick.is_none_or(|(g, _, _)| gain > g) {
                        pick = Some((gain, a, b));
                    }
                }
            }
            let Some((gain, a, b)) = pick else { break };
            locked[a] = true;
            locked[b] = true;
            for x in (0..n).filter(|&x| !locked[x]) {
                let delta = 2 * w[x * n + a] - 2 * w[x * n + b];
                if trial[x] == 0 {
                    d[x] += delta;
                } else {
                    d[x] -= delta;
                }
            }
            trial[a] = 1;
            trial[b] = 0;
            swaps.push((a, b));
            gains.push(gain);
        }
        let mut acc = 0;
        let mut best = (0, 0);
        for (k, g) in gains.iter().enumerate() {
            acc += g;
            if acc > best.0 {
                best = (acc, k + 1);
            }
        }
        if best.1 == 0 {
            return;
        }
        for &(a, b) in &swaps[..best.1] {
            side[a] = 1;
            side[b] = 0;
        }
    }
}

/// Clauset–Newman–Moore greedy agglomeration.
///
/// Starting from singletons, repeatedly merges the pair of communities with
/// the largest positive modularity gain, ties going to the lexicographically
/// smallest `(i, j)` of representative (minimum) node ids. Returns dense
/// labels ordered by representative.
pub fn greedy_modularity_partition(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let four_m = 4 * g.edge_count() as i64;
    let mut between = vec![0i64; n * n];
    for (u, v) in g.edges() {
        between[u * n + v] += 1;
        between[v * n + u] += 1;
    }
    let mut degree: Vec<i64> = (0..n).map(|u| g.degree(u) as i64).collect();
    let mut active = vec![true; n];
    let mut rep: Vec<usize> = (0..n).collect();
    loop {
        let mut pick: Option<(i64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                let gain = four_m * between[i * n + j] - 2 * degree[i] * degree[j];
                if pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, i, j));
                }
            }
        }
        let Some((gain, i, j)) = pick else { break };
        if gain <= 0 {
            break;
        }
        active[j] = false;
        degree[i] += degree[j];
        for k in 0..n {
            let e = between[j * n + k];
            between[i * n + k] += e;
            between[k * n + i] += e;
        }
        between[i * n + i] = 0;
        for r in rep.iter_mut() {
            if *r == j {
                *r = i;
            }
        }
    }
    let mut dense = vec![usize::MAX; n];
    let mut next = 0;
    rep.iter()
        .map(|&r| {
            if dense[r] == usize::MAX {
                dense[r] = next;
                next += 1;
            }
            dense[r]
        })
        .collect()
}

pub fn community_metrics<T: Scalar>(g: &Graph, seed: u64) -> Result<CommunityMetrics<T>> {
    community_metrics_with(g, seed, KL_RESTARTS)
}

pub(crate) fn community_metrics_with<T: Scalar>(g: &Graph, seed: u64, restarts: usize) -> Result<CommunityMetrics<T>> {
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let bisection = kernighan_lin_bisection(g, seed, restarts);
    let greedy = greedy_modularity_partition(g);
    Ok(CommunityMetrics {
        bimodularity: modularity(g, &bisection),
        greedy_modularity: modularity(g, &greedy),
    })
}
