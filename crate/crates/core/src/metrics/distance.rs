use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, Graph};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceMetrics<T> {
    pub average_path_length: T,
    pub average_eccentricity: T,
    pub diameter: T,
    pub radius: T,
    pub average_closeness: T,
    /// Wasserman–Faust closeness; equals `average_closeness` on connected
    /// graphs.
    pub average_closeness_wf: T,
}

pub fn distance_metrics<T: Scalar>(g: &Graph, d: &DistanceMatrix) -> Result<DistanceMetrics<T>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if !d.all_finite() {
        return Err(Error::Disconnected);
    }
    let mut total: u64 = 0;
    let mut ecc_sum: u64 = 0;
    let mut diameter = 0;
    let mut radius = u32::MAX;
    let mut closeness = T::zero();
    let mut closeness_wf = T::zero();
    let nm1 = T::from_count(n - 1);
    for i in 0..n {
        let row = d.row(i);
        let mut row_sum: u64 = 0;
        let mut ecc = 0;
        let mut reached = 0usize;
        for &x in row {
            if let Some(x) = x {
                row_sum += u64::from(x);
                ecc = ecc.max(x);
                reached += 1;
            }
        }
        total += row_sum;
        ecc_sum += u64::from(ecc);
        diameter = diameter.max(ecc);
        radius = radius.min(ecc);
        if row_sum > 0 {
            let reach = T::from_count(reached - 1);
            let c = reach / T::from_u64(row_sum).expect("representable");
            closeness += c;
            closeness_wf += reach / nm1 * c;
        }
    }
    let nt = T::from_count(n);
    Ok(DistanceMetrics {
        average_path_length: T::from_u64(total).expect("representable") / (nt * nm1),
        average_eccentricity: T::from_u64(ecc_sum).expect("representable") / nt,
        diameter: T::from_u32(diameter).expect("representable"),
        radius: T::from_u32(radius).expect("representable"),
        average_closeness: closeness / nt,
        average_closeness_wf: closeness_wf / nt,
    })
}
