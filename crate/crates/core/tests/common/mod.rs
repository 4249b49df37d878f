//! Naive reference implementations used by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use graphnas_core::graph::Graph;
use graphnas_core::rng;
use rand::Rng;

pub const INF: u32 = u32::MAX / 4;

/// All-pairs distances by Floyd–Warshall on the adjacency matrix.
pub fn floyd(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
        for j in 0..n {
            if g.has_edge(i, j) {
                row[j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Every shortest `s`–`t` path, found by depth-first extension of walks of
/// exactly `d(s, t)` edges.
pub fn shortest_paths(g: &Graph, d: &[Vec<u32>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn extend(g: &Graph, len: u32, t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if path.len() as u32 - 1 == len {
            if u == t {
                out.push(path.clone());
            }
            return;
        }
        for v in 0..g.node_count() {
            if g.has_edge(u, v) && !path.contains(&v) {
                path.push(v);
                extend(g, len, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(g, d[s][t], t, &mut vec![s], &mut out);
    out
}

/// Normalised node and edge betweenness by path enumeration. Edge values
/// follow `Graph::edges` order.
pub fn betweenness(g: &Graph) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    let d = floyd(g);
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut node = vec![0.0; n];
    let mut edge = vec![0.0; edges.len()];
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths(g, &d, s, t);
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    node[v] += share;
                }
                for w in p.windows(2) {
                    let key = (w[0].min(w[1]), w[0].max(w[1]));
                    let k = edges.iter().position(|&e| e == key).unwrap();
                    edge[k] += share;
                }
            }
        }
    }
    let ns = 2.0 / ((n - 1) * (n - 2)) as f64;
    let es = 2.0 / (n * (n - 1)) as f64;
    (
        node.iter().map(|x| x * ns).collect(),
        edge.iter().map(|x| x * es).collect(),
    )
}

/// Whether `s` reaches `t` avoiding `blocked` nodes and, optionally, the
/// direct edge `s–t`.
fn reaches(g: &Graph, s: usize, t: usize, blocked: u32, skip_direct: bool) -> bool {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if seen[v] || !g.has_edge(u, v) || blocked >> v & 1 == 1 {
                continue;
            }
            if skip_direct && ((u == s && v == t) || (u == t && v == s)) {
                continue;
            }
            if v == t {
                return true;
            }
            seen[v] = true;
            stack.push(v);
        }
    }
    false
}

/// Local vertex connectivity by Menger: the smallest set of other nodes
/// separating `s` from `t`, plus one for a direct edge.
pub fn local_connectivity(g: &Graph, s: usize, t: usize) -> usize {
    let n = g.node_count();
    let direct = g.has_edge(s, t);
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best = others.len();
    for bits in 0u32..(1 << others.len()) {
        let size = bits.count_ones() as usize;
        if size >= best {
            continue;
        }
        let blocked = others
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .fold(0u32, |acc, (_, &v)| acc | 1 << v);
        if !reaches(g, s, t, blocked, direct) {
            best = size;
        }
    }
    best + usize::from(direct)
}

/// Minimum edge cut over all vertex bipartitions.
pub fn edge_connectivity(g: &Graph) -> usize {
    let n = g.node_count();
    let mut best = usize::MAX;
    // node n-1 always on the far side
    for bits in 1u32..(1 << (n - 1)) {
        let cut = g.edges().filter(|&(u, v)| (bits >> u & 1) != (bits >> v & 1)).count();
        best = best.min(cut);
    }
    best
}

/// Newman modularity with the `2m` normalisation, from first principles.
pub fn modularity(g: &Graph, labels: &[usize]) -> f64 {
    let n = g.node_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                q += a - (g.degree(i) * g.degree(j)) as f64 / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over all set partitions (restricted growth strings).
pub fn best_partition_modularity(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    fn walk(g: &Graph, labels: &mut Vec<usize>, i: usize, max: usize, best: &mut f64) {
        if i == labels.len() {
            *best = best.max(modularity(g, labels));
            return;
        }
        for c in 0..=max + 1 {
            labels[i] = c;
            walk(g, labels, i + 1, max.max(c), best);
        }
    }
    if n == 1 {
        return 0.0;
    }
    labels[0] = 0;
    walk(g, &mut labels, 1, 0, &mut best);
    best
}

/// Best modularity over bisections with sides `⌊n/2⌋` and `⌈n/2⌉`.
pub fn best_bisection_modularity(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut best = f64::NEG_INFINITY;
    for bits in 0u32..(1 << n) {
        if bits.count_ones() as usize != n / 2 {
            continue;
        }
        let labels: Vec<usize> = (0..n).map(|v| (bits >> v & 1) as usize).collect();
        best = best.max(modularity(g, &labels));
    }
    best
}

/// Greedy agglomeration replayed naively: every candidate merge is scored
/// by recomputing modularity from scratch; the first strictly best pair in
/// (smallest member, smallest member) order wins; stops when no merge helps.
pub fn greedy_modularity(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut groups: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let labels_of = |groups: &[Vec<usize>]| {
        let mut l = vec![0; n];
        for (c, members) in groups.iter().enumerate() {
            for &v in members {
                l[v] = c;
            }
        }
        l
    };
    // exact scale 4m² keeps the comparisons free of rounding
    let scaled = |groups: &[Vec<usize>]| {
        (modularity(g, &labels_of(groups)) * 4.0 * (g.edge_count() as f64).powi(2)).round() as i64
    };
    loop {
        let current = scaled(&groups);
        let mut pick: Option<(i64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let mut merged = groups.clone();
                let moved = merged.remove(b);
                merged[a].extend(moved);
                let gain = scaled(&merged) - current;
                if pick.is_none_or(|(best, _, _)| gain > best) {
                    pick = Some((gain, a, b));
                }
            }
        }
        match pick {
            Some((gain, a, b)) if gain > 0 => {
                let moved = groups.remove(b);
                groups[a].extend(moved);
            }
            _ => return modularity(g, &labels_of(&groups)),
        }
    }
}

/// Core number of every node: the largest `k` whose `k`-core, found by
/// repeatedly deleting nodes of degree below `k`, still holds the node.
pub fn core_numbers(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut core = vec![0; n];
    for k in 1..n {
        let mut alive = vec![true; n];
        loop {
            let drop: Vec<usize> = (0..n)
                .filter(|&v| alive[v] && (0..n).filter(|&u| alive[u] && g.has_edge(u, v)).count() < k)
                .collect();
            if drop.is_empty() {
                break;
            }
            for v in drop {
                alive[v] = false;
            }
        }
        for v in 0..n {
            if alive[v] {
                core[v] = k;
            }
        }
    }
    core
}

/// Mean inverse distance over unordered pairs, unreachable pairs counting 0.
pub fn global_efficiency(g: &Graph) -> f64 {
    let n = g.node_count();
    if n < 2 {
        return 0.0;
    }
    let d = floyd(g);
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] < INF {
                s += 1.0 / d[i][j] as f64;
            }
        }
    }
    s / (n * (n - 1) / 2) as f64
}

pub fn local_efficiency(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut s = 0.0;
    for v in 0..n {
        let ns: Vec<usize> = (0..n).filter(|&u| g.has_edge(u, v)).collect();
        if ns.len() >= 2 {
            let edges = (0..ns.len())
                .flat_map(|a| (a + 1..ns.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| g.has_edge(ns[a], ns[b]));
            s += global_efficiency(&Graph::from_edges(ns.len(), edges).unwrap());
        }
    }
    s / n as f64
}

/// Householder reduction of a symmetric matrix to tridiagonal form;
/// returns the diagonal and the sub-diagonal.
fn tridiagonalize(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| m[i * n + k]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for (i, xi) in x.iter().enumerate() {
            v[k + 1 + i] = *xi;
        }
        v[k + 1] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|t| *t /= vn);
        let h: Vec<f64> = (0..n * n)
            .map(|idx| f64::from(u8::from(idx / n == idx % n)) - 2.0 * v[idx / n] * v[idx % n])
            .collect();
        let mul = |p: &[f64], q: &[f64]| -> Vec<f64> {
            (0..n * n)
                .map(|idx| (0..n).map(|t| p[(idx / n) * n + t] * q[t * n + idx % n]).sum())
                .collect()
        };
        m = mul(&mul(&h, &m), &h);
    }
    let d = (0..n).map(|i| m[i * n + i]).collect();
    let e = (1..n).map(|i| m[i * n + i - 1]).collect();
    (d, e)
}

/// Eigenvalues of a symmetric matrix, ascending: tridiagonalise, then
/// bisect on the Sturm count of eigenvalues below `x`.
pub fn eigenvalues_by_bisection(a: &[f64], n: usize) -> Vec<f64> {
    let (d, e) = tridiagonalize(a, n);
    let pivmin = f64::MIN_POSITIVE.max(e.iter().map(|v| v * v).fold(1.0, f64::max) * f64::EPSILON);
    let below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..n {
            q = d[i] - x - if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = (0..n)
        .map(|i| d[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 } + e.get(i).map_or(0.0, |v| v.abs()))
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

pub fn laplacian(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut l = vec![0.0; n * n];
    for (u, v) in g.edges() {
        l[u * n + v] -= 1.0;
        l[v * n + u] -= 1.0;
        l[u * n + u] += 1.0;
        l[v * n + v] += 1.0;
    }
    l
}

/// Every feature recomputed independently, in canonical order.
pub fn features(g: &Graph) -> Vec<(&'static str, f64)> {
    let n = g.node_count();
    let nf = n as f64;
    let m = g.edge_count() as f64;
    let deg: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let mean = deg.iter().sum::<f64>() / nf;
    let var = deg.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / nf;
    let second = deg.iter().map(|k| k * k).sum::<f64>() / nf;
    let entropy = deg.iter().map(|k| -(k / m) * (k / m).ln()).sum::<f64>() / nf;
    let wedges: usize = (0..n)
        .map(|v| {
            let ns: Vec<usize> = (0..n).filter(|&u| g.has_edge(u, v)).collect();
            ns.len() * ns.len().saturating_sub(1) / 2
        })
        .sum();
    let mut abs_diff = 0.0;
    for a in &deg {
        for b in &deg {
            abs_diff += (a - b).abs();
        }
    }
    let gini = abs_diff / (2.0 * nf * nf * mean);

    let mut triangles = 0usize;
    let mut clustering = 0.0;
    for v in 0..n {
        let ns: Vec<usize> = (0..n).filter(|&u| g.has_edge(u, v)).collect();
        let mut links = 0;
        for a in 0..ns.len() {
            for b in a + 1..ns.len() {
                if g.has_edge(ns[a], ns[b]) {
                    links += 1;
                }
            }
        }
        triangles += links;
        if ns.len() >= 2 {
            clustering += links as f64 / (ns.len() * (ns.len() - 1) / 2) as f64;
        }
    }
    let transitivity = if wedges == 0 {
        0.0
    } else {
        triangles as f64 / wedges as f64
    };

    let d = floyd(g);
    let total: u32 = d.iter().flatten().sum();
    let ecc: Vec<u32> = d.iter().map(|r| *r.iter().max().unwrap()).collect();
    let closeness: Vec<f64> = d.iter().map(|r| (nf - 1.0) / r.iter().sum::<u32>() as f64).collect();
    let closeness_wf: Vec<f64> = d
        .iter()
        .map(|r| {
            let reach = r.iter().filter(|&&x| x > 0 && x < INF).count() as f64;
            let s: u32 = r.iter().filter(|&&x| x < INF).sum();
            (reach / (nf - 1.0)) * (reach / s as f64)
        })
        .collect();

    let mut kappa = 0.0;
    for s in 0..n {
        for t in s + 1..n {
            kappa += local_connectivity(g, s, t) as f64;
        }
    }
    kappa /= (n * (n - 1) / 2) as f64;

    let (node_b, edge_b) = betweenness(g);
    let max_b = node_b.iter().copied().fold(0.0, f64::max);
    let dominance = node_b.iter().map(|b| max_b - b).sum::<f64>() / (nf - 1.0);

    let spectrum = eigenvalues_by_bisection(&laplacian(g), n);
    let cores = core_numbers(g);

    vec![
        ("average_degree", 2.0 * m / nf),
        ("clustering_coefficient", clustering / nf),
        ("heterogeneity", var / mean),
        ("average_path_length", total as f64 / (nf * (nf - 1.0))),
        ("bimodularity", best_bisection_modularity(g)),
        ("greedy_modularity", greedy_modularity(g)),
        ("resilience", second / mean),
        ("degree_entropy", entropy),
        ("wedge_count", wedges as f64),
        ("gini_index", gini),
        ("average_node_connectivity", kappa),
        ("edge_connectivity", edge_connectivity(g) as f64),
        ("average_closeness", closeness.iter().sum::<f64>() / nf),
        ("average_closeness_wf", closeness_wf.iter().sum::<f64>() / nf),
        ("average_eccentricity", ecc.iter().sum::<u32>() as f64 / nf),
        ("diameter", *ecc.iter().max().unwrap() as f64),
        ("radius", *ecc.iter().min().unwrap() as f64),
        (
            "average_edge_betweenness",
            edge_b.iter().sum::<f64>() / edge_b.len() as f64,
        ),
        ("average_node_betweenness", node_b.iter().sum::<f64>() / nf),
        ("central_point_of_dominance", dominance),
        ("core_number", cores.iter().sum::<usize>() as f64 / nf),
        ("laplacian_min", spectrum[1]),
        ("laplacian_max", spectrum[n - 1]),
        ("transitivity", transitivity),
        ("local_efficiency", local_efficiency(g)),
        ("global_efficiency", global_efficiency(g)),
    ]
}

/// Random connected graph on `n` nodes: a random spanning tree plus each
/// remaining pair with probability `p`.
pub fn random_connected(n: usize, p: f64, r: &mut rng::Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, r.random_range(0..=i));
    }
    let mut edges = Vec::new();
    for i in 1..n {
        let j = r.random_range(0..i);
        edges.push((order[i].min(order[j]), order[i].max(order[j])));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Fuzz corpus of connected graphs with `3 ≤ n ≤ max_n`, densities spread
/// over `[0, 1]`.
pub fn corpus(count: usize, max_n: usize, seed: u64) -> Vec<Graph> {
    let mut r = rng::stream(seed, rng::stream_id("corpus"));
    (0..count)
        .map(|i| {
            let n = 3 + i % (max_n - 2);
            let p = r.random::<f64>();
            random_connected(n, p, &mut r)
        })
        .collect()
}

/// Proptest strategy over connected graphs with `min_n ≤ n ≤ max_n`.
pub fn connected_graph(min_n: usize, max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (min_n..=max_n, 0.0f64..1.0, any::<u64>())
        .prop_map(|(n, p, seed)| random_connected(n, p, &mut rng::stream(seed, 0)))
}

/// Proptest strategy over arbitrary simple graphs, connected or not.
pub fn any_graph(max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1) / 2)))
        .prop_map(|(n, bits)| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::from_edges(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e)).unwrap()
        })
}
