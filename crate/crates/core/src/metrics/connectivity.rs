use crate::error::{Error, Result};
use crate::flow::{edge_connectivity, VertexConnectivity};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectivityMetrics<T> {
    pub average_node_connectivity: T,
    pub edge_connectivity: T,
}

/// Mean local node connectivity over all unordered pairs, and global edge
/// connectivity.
pub fn connectivity_metrics<T: Scalar>(g: &Graph) -> Result<ConnectivityMetrics<T>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let pairs = n * (n - 1) / 2;
    let total: u64 = if g.is_complete() {
        (pairs * (n - 1)) as u64
    } else {
        let mut vc = VertexConnectivity::new(g);
        let mut total = 0u64;
        for s in 0..n {
            for t in s + 1..n {
                total += u64::from(vc.local(s, t));
            }
        }
        total
    };
    Ok(ConnectivityMetrics {
        average_node_connectivity: T::from_u64(total).expect("representable") / T::from_count(pairs),
        edge_connectivity: T::from_u32(edge_connectivity(g)).expect("representable"),
    })
}
