//! Relational graphs realised as masked MLPs.
//!
//! The hidden units of every layer are split into one group per graph node.
//! Between two hidden layers the weight block from group `j` to group `i` is
//! trainable only when `(i, j)` is an edge or `i == j`; the input and output
//! layers are dense.

mod network;
mod train;

pub use network::{cross_entropy, Activations, Params};
pub use train::{
    concentric_rings, gaussian_blobs, nearest_centroid_error, parity_blobs, top1_error, train_toy, write_epoch_csv,
    Dataset, EpochRecord, TrainConfig, TrainOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Weight layers of the default network.
pub const DEFAULT_LAYERS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskedMlpSpec {
    n_layers: usize,
    graph: Graph,
    group_sizes: Vec<usize>,
    owner: Vec<usize>,
    input_dim: usize,
    output_dim: usize,
    masks: Vec<Option<Vec<bool>>>,
}

/// Multiply-plus-add count of one forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlopBudget(pub u64);

impl MaskedMlpSpec {
    /// Network whose hidden width `width` is spread over the graph's nodes:
    /// the first `width mod n` nodes own `⌈width/n⌉` units, the rest
    /// `⌊width/n⌋`.
    pub fn with_width(g: &Graph, width: usize, n_layers: usize, input_dim: usize, output_dim: usize) -> Result<Self> {
        let n = g.node_count();
        if n == 0 {
            return Err(Error::TooSmall { need: 1, got: 0 });
        }
        if width < n {
            return Err(Error::param("width", format!("{width} units cannot cover {n} nodes")));
        }
        let sizes = (0..n).map(|i| width / n + usize::from(i < width % n)).collect();
        Self::with_groups(g, sizes, n_layers, input_dim, output_dim)
    }

    pub fn with_groups(
        g: &Graph,
        group_sizes: Vec<usize>,
        n_layers: usize,
        input_dim: usize,
        output_dim: usize,
    ) -> Result<Self> {
        if n_layers < 2 {
            return Err(Error::param(
                "n_layers",
                format!("need at least 2 weight layers, got {n_layers}"),
            ));
        }
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::param("input_dim", "input and output sizes must be positive"));
        }
        if group_sizes.len() != g.node_count() {
            return Err(Error::Shape(format!(
                "{} group sizes for {} nodes",
                group_sizes.len(),
                g.node_count()
            )));
        }
        if group_sizes.contains(&0) {
            return Err(Error::param("group_sizes", "every node needs at least one unit"));
        }
        let owner: Vec<usize> = group_sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat_n(i, s))
            .collect();
        let w = owner.len();
        let block: Vec<bool> = owner
            .iter()
            .flat_map(|&o| owner.iter().map(move |&i| (o, i)))
            .map(|(o, i)| o == i || g.has_edge(o, i))
            .collect();
        let masks = (0..n_layers)
            .map(|l| (l > 0 && l + 1 < n_layers).then(|| block.clone()))
            .collect();
        debug_assert_eq!(block.len(), w * w);
        Ok(MaskedMlpSpec {
            n_layers,
            graph: g.clone(),
            group_sizes,
            owner,
            input_dim,
            output_dim,
            masks,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    /// Units per node when all groups have the same size.
    pub fn units_per_node(&self) -> Option<usize> {
        let first = self.group_sizes[0];
        self.group_sizes.iter().all(|&s| s == first).then_some(first)
    }

    pub fn hidden_width(&self) -> usize {
        self.owner.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Node owning hidden unit `u`.
    pub fn owner(&self, u: usize) -> usize {
        self.owner[u]
    }

    /// `(inputs, outputs)` of weight layer `l`.
    pub fn layer_dims(&self, l: usize) -> (usize, usize) {
        let w = self.hidden_width();
        let fan_in = if l == 0 { self.input_dim } else { w };
        let fan_out = if l + 1 == self.n_layers { self.output_dim } else { w };
        (fan_in, fan_out)
    }

    /// Whether layer `l` is a hidden-to-hidden layer carrying the mask.
    pub fn is_masked(&self, l: usize) -> bool {
        l > 0 && l + 1 < self.n_layers
    }

    /// Whether block `(i, j)` is active: an edge or the diagonal.
    pub fn block_active(&self, i: usize, j: usize) -> bool {
        i == j || self.graph.has_edge(i, j)
    }

    /// Whether weight `(out, inp)` of layer `l` is trainable.
    pub fn weight_active(&self, l: usize, out: usize, inp: usize) -> bool {
        !self.is_masked(l) || self.block_active(self.owner[out], self.owner[inp])
    }

    /// Row-major `out × in` pattern of layer `l`; `None` for dense layers.
    pub fn layer_mask(&self, l: usize) -> Option<&[bool]> {
        self.masks[l].as_deref()
    }

    pub fn active_weights(&self, l: usize) -> u64 {
        let (fan_in, fan_out) = self.layer_dims(l);
        if !self.is_masked(l) {
            return (fan_in * fan_out) as u64;
        }
        let s = &self.group_sizes;
        let mut count = 0u64;
        for i in 0..s.len() {
            count += (s[i] * s[i]) as u64;
            for &j in self.graph.neighbors(i) {
                count += (s[i] * s[j]) as u64;
            }
        }
        count
    }

    /// FLOPs of hidden-to-hidden layers only.
    pub fn hidden_flops(&self) -> FlopBudget {
        FlopBudget(
            (0..self.n_layers)
                .filter(|&l| self.is_masked(l))
                .map(|l| 2 * self.active_weights(l))
                .sum(),
        )
    }
}

/// Spec with `baseline_width / n` units on every node.
pub fn build_masked_mlp(
    g: &Graph,
    baseline_width: usize,
    n_layers: usize,
    input_dim: usize,
    output_dim: usize,
) -> Result<MaskedMlpSpec> {
    let n = g.node_count();
    if n == 0 || !baseline_width.is_multiple_of(n) {
        return Err(Error::param(
            "baseline_width",
            format!("{baseline_width} is not divisible by {n} nodes"),
        ));
    }
    MaskedMlpSpec::with_width(g, baseline_width, n_layers, input_dim, output_dim)
}

/// Two FLOPs (one multiply, one add) per active weight, over all layers.
pub fn count_flops(spec: &MaskedMlpSpec) -> FlopBudget {
    FlopBudget((0..spec.n_layers).map(|l| 2 * spec.active_weights(l)).sum())
}

/// Spec for `g` whose FLOPs are closest to `reference`.
///
/// Searches the total hidden width; FLOPs grow strictly with width, so the
/// best width is one of the two around the crossing point. Ties go to the
/// narrower network.
pub fn match_flop_budget(
    g: &Graph,
    reference: FlopBudget,
    n_layers: usize,
    input_dim: usize,
    output_dim: usize,
) -> Result<MaskedMlpSpec> {
    let n = g.node_count();
    let build = |w: usize| MaskedMlpSpec::with_width(g, w, n_layers, input_dim, output_dim);
    // same count as `count_flops(&build(w))` without materialising the masks
    let flops = |w: usize| -> Result<u64> {
        if n == 0 || n_layers < 2 {
            return build(w).map(|s| count_flops(&s).0);
        }
        let size = |i: usize| (w / n + usize::from(i < w % n)) as u64;
        let block: u64 = (0..n)
            .map(|i| size(i) * (size(i) + g.neighbors(i).iter().map(|&j| size(j)).sum::<u64>()))
            .sum();
        let w = w as u64;
        Ok(2 * (input_dim as u64 * w + (n_layers as u64 - 2) * block + w * output_dim as u64))
    };
    let mut lo = n;
    if flops(lo)? >= reference.0 {
        return build(lo);
    }
    let mut hi = lo * 2;
    while flops(hi)? < reference.0 {
        lo = hi;
        hi *= 2;
    }
    // flops(lo) < reference <= flops(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if flops(mid)? < reference.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let below = reference.0 - flops(lo)?;
    let above = flops(hi)? - reference.0;
    build(if below <= above { lo } else { hi })
}

/// Spec and trained parameters as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpDocument {
    pub n_layers: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub nodes: usize,
    pub group_sizes: Vec<usize>,
    /// Row-major `nodes × nodes` block mask, 64 blocks per word.
    pub block_mask: Vec<u64>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpDocument {
    pub fn new(spec: &MaskedMlpSpec, params: &Params<f64>) -> Self {
        let n = spec.graph.node_count();
        let mut block_mask = vec![0u64; (n * n).div_ceil(64)];
        for i in 0..n {
            for j in 0..n {
                if spec.block_active(i, j) {
                    let b = i * n + j;
                    block_mask[b / 64] |= 1 << (b % 64);
                }
            }
        }
        MlpDocument {
            n_layers: spec.n_layers,
            input_dim: spec.input_dim,
            output_dim: spec.output_dim,
            nodes: n,
            group_sizes: spec.group_sizes.clone(),
            block_mask,
            weights: params.weights.clone(),
            biases: params.biases.clone(),
        }
    }

    pub fn into_parts(self) -> Result<(MaskedMlpSpec, Params<f64>)> {
        let n = self.nodes;
        if self.block_mask.len() != (n * n).div_ceil(64) {
            return Err(Error::Shape("block mask length".into()));
        }
        let bit = |i: usize, j: usize| {
            let b = i * n + j;
            self.block_mask[b / 64] >> (b % 64) & 1 == 1
        };
        let mut edges = Vec::new();
        for i in 0..n {
            if !bit(i, i) {
                return Err(Error::InvalidGraph(format!("diagonal block {i} inactive")));
            }
            for j in i + 1..n {
                if bit(i, j) != bit(j, i) {
                    return Err(Error::InvalidGraph(format!("block mask asymmetric at ({i}, {j})")));
                }
                if bit(i, j) {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n, edges)?;
        let spec = MaskedMlpSpec::with_groups(&g, self.group_sizes, self.n_layers, self.input_dim, self.output_dim)?;
        let params = Params {
            weights: self.weights,
            biases: self.biases,
        };
        params.check_shape(&spec)?;
        Ok((spec, params))
    }
}
