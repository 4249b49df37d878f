use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeStatistics<T> {
    pub average_degree: T,
    /// Variance-to-mean ratio of the degrees.
    pub heterogeneity: T,
    /// Second moment over first moment of the degrees.
    pub resilience: T,
    pub degree_entropy: T,
    pub wedge_count: T,
    pub gini_index: T,
}

/// Degree-distribution features.
///
/// The entropy is `(1/n) Σ −(k_i/m) ln(k_i/m)` with `m` the edge count, so
/// the weights `k_i/m` sum to 2 rather than 1. The Gini index ranks degrees
/// ascending with 1-based rank.
pub fn degree_statistics<T: Scalar>(g: &Graph) -> Result<DegreeStatistics<T>> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::NoEdges);
    }
    let n = T::from_count(g.node_count());
    let mut degrees = g.degree_sequence();
    let sum = T::from_count(2 * m);
    let sum_sq: T = degrees.iter().map(|&k| T::from_count(k * k)).sum();
    let mean = sum / n;
    let mean_sq = sum_sq / n;

    let m_t = T::from_count(m);
    let entropy: T = degrees
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let x = T::from_count(k) / m_t;
            -x * x.ln()
        })
        .sum::<T>()
        / n;

    let wedges: usize = degrees.iter().map(|&k| k * k.saturating_sub(1) / 2).sum();

    degrees.sort_unstable();
    let ranked: T = degrees
        .iter()
        .enumerate()
        .map(|(i, &k)| T::from_count((i + 1) * k))
        .sum();
    let gini = T::lit(2.0) * ranked / (n * sum) - (n + T::one()) / n;

    Ok(DegreeStatistics {
        average_degree: mean,
        heterogeneity: (mean_sq - mean * mean) / mean,
        resilience: mean_sq / mean,
        degree_entropy: entropy,
        wedge_count: T::from_count(wedges),
        gini_index: gini,
    })
}
