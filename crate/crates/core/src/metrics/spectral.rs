use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::symmetric_eigenvalues;
use crate::scalar::Scalar;

/// Which eigenvalue reports as `laplacian_min`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianMin {
    /// Second-smallest eigenvalue.
    #[default]
    AlgebraicConnectivity,
    /// Smallest eigenvalue, identically 0 up to rounding.
    Smallest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralMetrics<T> {
    pub laplacian_min: T,
    pub laplacian_max: T,
}

/// Ascending eigenvalues of `L = D − A`.
pub fn laplacian_spectrum<T: Scalar>(g: &Graph) -> Vec<T> {
    let n = g.node_count();
    let mut l = vec![T::zero(); n * n];
    for u in 0..n {
        l[u * n + u] = T::from_count(g.degree(u));
        for &v in g.neighbors(u) {
            l[u * n + v] = -T::one();
        }
    }
    symmetric_eigenvalues(&l, n)
}

pub fn spectral_metrics<T: Scalar>(g: &Graph) -> Result<SpectralMetrics<T>> {
    spectral_metrics_with(g, LaplacianMin::AlgebraicConnectivity)
}

pub(crate) fn spectral_metrics_with<T: Scalar>(g: &Graph, mode: LaplacianMin) -> Result<SpectralMetrics<T>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let eig = laplacian_spectrum::<T>(g);
    let min = match mode {
        LaplacianMin::AlgebraicConnectivity => eig[1],
        LaplacianMin::Smallest => eig[0],
    };
    Ok(SpectralMetrics {
        laplacian_min: min,
        laplacian_max: eig[n - 1],
    })
}
