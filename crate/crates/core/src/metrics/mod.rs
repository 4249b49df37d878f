//! Topological features of a graph.
//!
//! Each sub-module computes one family of related features; [`featurize`]
//! assembles all 26 in canonical order and [`compute_features`] evaluates only
//! a requested subset, sharing intermediate results between features of the
//! same family.

mod betweenness;
mod clustering;
mod community;
mod connectivity;
mod core_number;
mod degree;
mod distance;
mod efficiency;
mod spectral;
pub mod table;

pub use betweenness::{betweenness_metrics, BetweennessMetrics};
pub use clustering::{clustering_and_transitivity, ClusteringMetrics};
pub use community::{
    community_metrics, greedy_modularity_partition, kernighan_lin_bisection, modularity, CommunityMetrics, KL_RESTARTS,
};
pub use connectivity::{connectivity_metrics, ConnectivityMetrics};
pub use core_number::{core_number_metric, core_numbers};
pub use degree::{degree_statistics, DegreeStatistics};
pub use distance::{distance_metrics, DistanceMetrics};
pub use efficiency::{efficiency_metrics, EfficiencyMetrics};
pub use spectral::{laplacian_spectrum, spectral_metrics, LaplacianMin, SpectralMetrics};

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, Graph};
use crate::scalar::Scalar;

macro_rules! features {
    ($($variant:ident => $name:literal,)*) => {
        /// One of the 26 graph features, in canonical order.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Feature {
            $($variant,)*
        }

        impl Feature {
            pub const ALL: [Feature; FEATURE_COUNT] = [$(Feature::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Feature::$variant => $name,)*
                }
            }
        }
    };
}

pub const FEATURE_COUNT: usize = 26;

features! {
    AverageDegree => "average_degree",
    ClusteringCoefficient => "clustering_coefficient",
    Heterogeneity => "heterogeneity",
    AveragePathLength => "average_path_length",
    Bimodularity => "bimodularity",
    GreedyModularity => "greedy_modularity",
    Resilience => "resilience",
    DegreeEntropy => "degree_entropy",
    WedgeCount => "wedge_count",
    GiniIndex => "gini_index",
    AverageNodeConnectivity => "average_node_connectivity",
    EdgeConnectivity => "edge_connectivity",
    AverageCloseness => "average_closeness",
    AverageClosenessWf => "average_closeness_wf",
    AverageEccentricity => "average_eccentricity",
    Diameter => "diameter",
    Radius => "radius",
    AverageEdgeBetweenness => "average_edge_betweenness",
    AverageNodeBetweenness => "average_node_betweenness",
    CentralPointOfDominance => "central_point_of_dominance",
    CoreNumber => "core_number",
    LaplacianMin => "laplacian_min",
    LaplacianMax => "laplacian_max",
    Transitivity => "transitivity",
    LocalEfficiency => "local_efficiency",
    GlobalEfficiency => "global_efficiency",
}

impl Feature {
    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    fn family(self) -> Family {
        use Feature::*;
        match self {
            AverageDegree | Heterogeneity | Resilience | DegreeEntropy | WedgeCount | GiniIndex => Family::Degree,
            AveragePathLength | AverageEccentricity | Diameter | Radius | AverageCloseness | AverageClosenessWf => {
                Family::Distance
            }
            ClusteringCoefficient | Transitivity => Family::Clustering,
            AverageNodeBetweenness | AverageEdgeBetweenness | CentralPointOfDominance => Family::Betweenness,
            AverageNodeConnectivity | EdgeConnectivity => Family::Connectivity,
            Bimodularity | GreedyModularity => Family::Community,
            LaplacianMin | LaplacianMax => Family::Spectral,
            LocalEfficiency | GlobalEfficiency => Family::Efficiency,
            CoreNumber => Family::Core,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Degree,
    Distance,
    Clustering,
    Betweenness,
    Connectivity,
    Community,
    Spectral,
    Efficiency,
    Core,
}

/// All 26 features of one graph in canonical order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector<T> {
    values: [T; FEATURE_COUNT],
}

impl<T: Scalar> FeatureVector<T> {
    pub fn from_values(values: [T; FEATURE_COUNT]) -> Self {
        FeatureVector { values }
    }

    pub fn get(&self, f: Feature) -> T {
        self.values[f.index()]
    }

    pub fn values(&self) -> &[T; FEATURE_COUNT] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Feature, T)> + '_ {
        Feature::ALL.iter().map(move |&f| (f, self.values[f.index()]))
    }
}

impl<T> Index<Feature> for FeatureVector<T> {
    type Output = T;

    fn index(&self, f: Feature) -> &T {
        &self.values[f.index()]
    }
}

/// Tunables of the feature computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeaturizeOptions {
    pub laplacian_min: LaplacianMin,
    pub kl_restarts: usize,
}

impl Default for FeaturizeOptions {
    fn default() -> Self {
        FeaturizeOptions {
            laplacian_min: LaplacianMin::AlgebraicConnectivity,
            kl_restarts: KL_RESTARTS,
        }
    }
}

/// All 26 features of a connected graph; deterministic in `(g, seed)`.
pub fn featurize<T: Scalar>(g: &Graph, seed: u64) -> Result<FeatureVector<T>> {
    featurize_with(g, seed, &FeaturizeOptions::default())
}

pub fn featurize_with<T: Scalar>(g: &Graph, seed: u64, opts: &FeaturizeOptions) -> Result<FeatureVector<T>> {
    let values = compute_features_with(g, &Feature::ALL, seed, opts)?;
    let mut out = [T::zero(); FEATURE_COUNT];
    out.copy_from_slice(&values);
    Ok(FeatureVector { values: out })
}

/// Values of `features`, in the order given, computing only the families
/// they need.
pub fn compute_features<T: Scalar>(g: &Graph, features: &[Feature], seed: u64) -> Result<Vec<T>> {
    compute_features_with(g, features, seed, &FeaturizeOptions::default())
}

pub fn compute_features_with<T: Scalar>(
    g: &Graph,
    features: &[Feature],
    seed: u64,
    opts: &FeaturizeOptions,
) -> Result<Vec<T>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut cache = FamilyCache::<T>::default();
    features.iter().map(|&f| cache.value(g, f, seed, opts)).collect()
}

#[derive(Default)]
struct FamilyCache<T> {
    dist: Option<DistanceMatrix>,
    degree: Option<DegreeStatistics<T>>,
    distance: Option<DistanceMetrics<T>>,
    clustering: Option<ClusteringMetrics<T>>,
    betweenness: Option<BetweennessMetrics<T>>,
    connectivity: Option<ConnectivityMetrics<T>>,
    community: Option<CommunityMetrics<T>>,
    spectral: Option<SpectralMetrics<T>>,
    efficiency: Option<EfficiencyMetrics<T>>,
    core: Option<T>,
}

impl<T: Scalar> FamilyCache<T> {
    fn distances(&mut self, g: &Graph) -> &DistanceMatrix {
        self.dist.get_or_insert_with(|| g.all_pairs_shortest_paths())
    }

    fn value(&mut self, g: &Graph, f: Feature, seed: u64, opts: &FeaturizeOptions) -> Result<T> {
        use Feature::*;
        Ok(match f.family() {
            Family::Degree => {
                if self.degree.is_none() {
                    self.degree = Some(degree_statistics(g)?);
                }
                let d = self.degree.as_ref().expect("filled");
                match f {
                    AverageDegree => d.average_degree,
                    Heterogeneity => d.heterogeneity,
                    Resilience => d.resilience,
                    DegreeEntropy => d.degree_entropy,
                    WedgeCount => d.wedge_count,
                    _ => d.gini_index,
                }
            }
            Family::Distance => {
                if self.distance.is_none() {
                    let m = distance_metrics(g, self.distances(g))?;
                    self.distance = Some(m);
                }
                let d = self.distance.as_ref().expect("filled");
                match f {
                    AveragePathLength => d.average_path_length,
                    AverageEccentricity => d.average_eccentricity,
                    Diameter => d.diameter,
                    Radius => d.radius,
                    AverageCloseness => d.average_closeness,
                    _ => d.average_closeness_wf,
                }
            }
            Family::Clustering => {
                let c = *self.clustering.get_or_insert_with(|| clustering_and_transitivity(g));
                match f {
                    ClusteringCoefficient => c.clustering_coefficient,
                    _ => c.transitivity,
                }
            }
            Family::Betweenness => {
                if self.betweenness.is_none() {
                    self.betweenness = Some(betweenness_metrics(g)?);
                }
                let b = self.betweenness.as_ref().expect("filled");
                match f {
                    AverageNodeBetweenness => b.average_node_betweenness,
                    AverageEdgeBetweenness => b.average_edge_betweenness,
                    _ => b.central_point_of_dominance,
                }
            }
            Family::Connectivity => {
                if self.connectivity.is_none() {
                    self.connectivity = Some(connectivity_metrics(g)?);
                }
                let c = self.connectivity.as_ref().expect("filled");
                match f {
                    AverageNodeConnectivity => c.average_node_connectivity,
                    _ => c.edge_connectivity,
                }
            }
            Family::Community => {
                if self.community.is_none() {
                    self.community = Some(community::community_metrics_with(g, seed, opts.kl_restarts)?);
                }
                let c = self.community.as_ref().expect("filled");
                match f {
                    Bimodularity => c.bimodularity,
                    _ => c.greedy_modularity,
                }
            }
            Family::Spectral => {
                if self.spectral.is_none() {
                    self.spectral = Some(spectral::spectral_metrics_with(g, opts.laplacian_min)?);
                }
                let s = self.spectral.as_ref().expect("filled");
                match f {
                    LaplacianMin => s.laplacian_min,
                    _ => s.laplacian_max,
                }
            }
            Family::Efficiency => {
                if self.efficiency.is_none() {
                    let e = efficiency_metrics(g, self.distances(g))?;
                    self.efficiency = Some(e);
                }
                let e = self.efficiency.as_ref().expect("filled");
                match f {
                    LocalEfficiency => e.local_efficiency,
                    _ => e.global_efficiency,
                }
            }
            Family::Core => *self.core.get_or_insert_with(|| core_number_metric(g)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_names_round_trip() {
        assert_eq!(Feature::ALL.len(), 26);
        for (i, f) in Feature::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
            assert_eq!(f.name().parse::<Feature>().unwrap(), *f);
        }
        assert!("eccentricity".parse::<Feature>().is_err());
    }

    #[test]
    fn k4_vector() {
        let v = featurize::<f64>(&Graph::complete(4), 0).unwrap();
        use Feature::*;
        let expect = [
            (AverageDegree, 3.0),
            (Heterogeneity, 0.0),
            (Resilience, 3.0),
            (WedgeCount, 12.0),
            (GiniIndex, 0.0),
            (ClusteringCoefficient, 1.0),
            (Transitivity, 1.0),
            (AverageNodeBetweenness, 0.0),
            (CentralPointOfDominance, 0.0),
            (AverageNodeConnectivity, 3.0),
            (EdgeConnectivity, 3.0),
            (GreedyModularity, 0.0),
            (LaplacianMin, 4.0),
            (LaplacianMax, 4.0),
            (GlobalEfficiency, 1.0),
            (LocalEfficiency, 1.0),
            (CoreNumber, 3.0),
            (AveragePathLength, 1.0),
            (Diameter, 1.0),
            (Radius, 1.0),
        ];
        for (f, x) in expect {
            assert!((v[f] - x).abs() < 1e-12, "{f}: {} vs {x}", v[f]);
        }
    }

    #[test]
    fn c5_path_length_and_clustering() {
        let v = featurize::<f64>(&Graph::cycle(5), 3).unwrap();
        assert_eq!(v[Feature::AveragePathLength], 1.5);
        assert_eq!(v[Feature::ClusteringCoefficient], 0.0);
    }

    #[test]
    fn deterministic_in_seed() {
        let g = Graph::from_edges(
            7,
            [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (5, 6), (6, 0)],
        )
        .unwrap();
        let a = featurize::<f64>(&g, 17).unwrap();
        let b = featurize::<f64>(&g, 17).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn subset_matches_full_vector() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap();
        let full = featurize::<f64>(&g, 5).unwrap();
        let subset = [Feature::GiniIndex, Feature::Diameter, Feature::Bimodularity];
        let part = compute_features::<f64>(&g, &subset, 5).unwrap();
        for (f, x) in subset.iter().zip(part) {
            assert_eq!(full[*f], x);
        }
    }

    #[test]
    fn rejects_disconnected() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(featurize::<f64>(&g, 0), Err(Error::Disconnected)));
    }

    #[test]
    fn single_precision() {
        let v = featurize::<f32>(&Graph::cycle(6), 0).unwrap();
        assert!((v[Feature::AveragePathLength] - 1.8).abs() < 1e-6);
    }
}
