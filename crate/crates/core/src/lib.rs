//! Graph-space neural architecture search.
//!
//! Relational graphs are generated ([`generators`]), described by 26
//! topological features ([`metrics`]), scored by a linear surrogate fitted on
//! those features ([`surrogate`]), and improved by surrogate-guided greedy
//! rewiring ([`search`]). [`mlp`] turns a graph into a masked MLP so predicted
//! scores can be checked against trained ones.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below fix the common choice.

pub mod error;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod mlp;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod stats;
pub mod surrogate;

pub use error::{Error, Result};
pub use generators::{generate, Generator, GeneratorSpec, GraphPool};
pub use graph::{DistanceMatrix, Graph};
pub use metrics::{featurize, Feature, FeatureVector};
pub use scalar::Scalar;

pub type FeatureVectorF64 = metrics::FeatureVector<f64>;
pub type FeatureVectorF32 = metrics::FeatureVector<f32>;
pub type DatasetF64 = surrogate::Dataset<f64>;
pub type RegressionModelF64 = surrogate::RegressionModel<f64>;
pub type RegressionModelF32 = surrogate::RegressionModel<f32>;
pub type SearchTraceF64 = search::SearchTrace<f64>;
