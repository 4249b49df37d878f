//! Surrogate-guided greedy rewiring.
//!
//! From the current graph a random operator is proposed, the rewired graph
//! is scored by the surrogate, and the proposal is committed only when the
//! predicted score moves in the configured direction by at least a relative
//! `epsilon`. Rejected proposals are redrawn until a per-step budget runs out.

mod ops;
mod trace;

pub use ops::{propose, OpKind, RewireOp, DEFAULT_OPERATOR_RETRIES};
pub use trace::{
    multi_seed_statistics, multi_seed_statistics_with, read_jsonl, run_seed, validate_trace, write_bucket_csv,
    write_cost_csv, write_jsonl, write_path_csv, BucketSummary, MeasureFn, MultiSeedSummary, Operands, Quartiles,
    StepRecord, Validated,
};

use std::time::Instant;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{compute_features_with, Feature, FeaturizeOptions};
use crate::rng;
use crate::scalar::Scalar;
use crate::surrogate::RegressionModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Drive the predicted score down.
    #[default]
    Minimize,
    /// Drive the predicted score up.
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Minimum relative improvement for a proposal to be accepted.
    pub epsilon: f64,
    /// Accepted steps after which the search stops.
    pub max_steps: usize,
    /// Rejected proposals tolerated in one step before giving up.
    pub max_proposals_per_step: usize,
    /// Operand resampling budget inside one proposal.
    pub operator_retries: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Seed passed to the featurizer (community detection restarts).
    pub feature_seed: u64,
    /// Operator kinds the search may draw from.
    pub operators: Vec<OpKind>,
    /// Featurizer tunables; must match the ones the model was fitted on.
    #[serde(skip)]
    pub feature_options: FeaturizeOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            epsilon: 0.01,
            max_steps: 10,
            max_proposals_per_step: 200,
            operator_retries: DEFAULT_OPERATOR_RETRIES,
            mode: Mode::Minimize,
            seed: 0,
            feature_seed: 0,
            operators: OpKind::ALL.to_vec(),
            feature_options: FeaturizeOptions::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(
                "epsilon",
                format!("must lie in (0, 1), got {}", self.epsilon),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::param("max_steps", "must be at least 1"));
        }
        if self.max_proposals_per_step == 0 {
            return Err(Error::param("max_proposals_per_step", "must be at least 1"));
        }
        if self.operators.is_empty() {
            return Err(Error::param("operators", "no operator kinds enabled"));
        }
        Ok(())
    }

    /// Whether moving from `prev` to `next` passes the acceptance rule.
    pub fn accepts<T: Scalar>(&self, prev: T, next: T) -> bool {
        let gain = match self.mode {
            Mode::Minimize => prev - next,
            Mode::Maximize => next - prev,
        };
        gain > T::zero() && gain >= T::lit(self.epsilon) * prev.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// All `max_steps` steps were accepted.
    Completed,
    /// The proposal budget ran out first: no tried neighbor passed the rule.
    ConvergedLocal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SearchStep<T> {
    /// 1-based index of the accepted step.
    pub step: usize,
    pub op: RewireOp,
    pub predicted: T,
    pub measured: Option<T>,
    /// Proposals rejected since the previous accepted step.
    pub rejected_count: usize,
    /// Featurization time spent from the start of the run up to this step.
    pub cumulative_feature_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace<T> {
    pub initial: Graph,
    pub initial_predicted: T,
    pub initial_measured: Option<T>,
    pub steps: Vec<SearchStep<T>>,
    pub final_graph: Graph,
    pub status: SearchStatus,
    pub wall_time_ms: f64,
}

impl<T: Scalar> SearchTrace<T> {
    /// Graph after each step, starting with the initial graph.
    pub fn graphs(&self) -> Result<Vec<Graph>> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.initial.clone());
        for s in &self.steps {
            let next = s.op.apply(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn predicted_path(&self) -> Vec<T> {
        std::iter::once(self.initial_predicted)
            .chain(self.steps.iter().map(|s| s.predicted))
            .collect()
    }

    /// True when two traces took the same path, ignoring timings.
    pub fn same_path(&self, other: &Self) -> bool {
        self.initial == other.initial
            && self.final_graph == other.final_graph
            && self.status == other.status
            && self.initial_predicted == other.initial_predicted
            && self.steps.len() == other.steps.len()
            && self.steps.iter().zip(&other.steps).all(|(a, b)| {
                a.step == b.step
                    && a.op == b.op
                    && a.predicted == b.predicted
                    && a.measured == b.measured
                    && a.rejected_count == b.rejected_count
            })
    }
}

/// Surrogate prediction for `g` on the model's own features.
pub fn predict_graph<T: Scalar>(model: &RegressionModel<T>, g: &Graph, feature_seed: u64) -> Result<T> {
    predict_graph_with(model, g, feature_seed, &FeaturizeOptions::default())
}

pub fn predict_graph_with<T: Scalar>(
    model: &RegressionModel<T>,
    g: &Graph,
    feature_seed: u64,
    opts: &FeaturizeOptions,
) -> Result<T> {
    if model.features.is_empty() {
        return Ok(model.intercept);
    }
    let values = compute_features_with::<T>(g, &model.features, feature_seed, opts)?;
    Ok(model.predict_values(&values))
}

/// Greedy surrogate-guided rewiring from `g0`.
pub fn search<T: Scalar>(g0: &Graph, model: &RegressionModel<T>, config: &SearchConfig) -> Result<SearchTrace<T>> {
    config.validate()?;
    model.validate()?;
    if !g0.is_connected() {
        return Err(Error::Disconnected);
    }
    let features: &[Feature] = &model.features;
    let start = Instant::now();
    let mut feature_ms = 0.0;
    let timed = |g: &Graph| -> Result<(T, f64)> {
        let t = Instant::now();
        let p = predict_graph_with(model, g, config.feature_seed, &config.feature_options)?;
        Ok((p, t.elapsed().as_secs_f64() * 1e3))
    };
    let (initial_predicted, dt) = timed(g0)?;
    feature_ms += dt;
    let mut rng = rng::stream(config.seed, rng::stream_id("search"));
    let mut current = g0.clone();
    let mut prev = initial_predicted;
    let mut steps = Vec::new();
    let mut status = SearchStatus::Completed;
    'steps: while steps.len() < config.max_steps {
        let mut rejected = 0;
        let mut kinds = config.operators.clone();
        kinds.sort();
        kinds.dedup();
        loop {
            if rejected >= config.max_proposals_per_step || kinds.is_empty() {
                status = SearchStatus::ConvergedLocal;
                break 'steps;
            }
            let kind = *kinds.choose(&mut rng).expect("non-empty");
            let (op, candidate) = match propose(&current, kind, &mut rng, config.operator_retries) {
                Ok(x) => x,
                Err(Error::NotApplicable(_)) => {
                    kinds.retain(|&k| k != kind);
                    continue;
                }
                Err(e) => return Err(e),
            };
            // with no features every proposal predicts the same value
            let p = if features.is_empty() {
                prev
            } else {
                let (p, dt) = timed(&candidate)?;
                feature_ms += dt;
                p
            };
            if config.accepts(prev, p) {
                steps.push(SearchStep {
                    step: steps.len() + 1,
                    op,
                    predicted: p,
                    measured: None,
                    rejected_count: rejected,
                    cumulative_feature_time_ms: feature_ms,
                });
                current = candidate;
                prev = p;
                continue 'steps;
            }
            rejected += 1;
        }
    }
    Ok(SearchTrace {
        initial: g0.clone(),
        initial_predicted,
        initial_measured: None,
        steps,
        final_graph: current,
        status,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::featurize;

    fn degree_model() -> RegressionModel<f64> {
        RegressionModel::from_raw(vec![Feature::AverageDegree], vec![1.0], 0.0).unwrap()
    }

    #[test]
    fn constant_model_converges_immediately() {
        let cfg = SearchConfig {
            max_proposals_per_step: 30,
            ..SearchConfig::default()
        };
        let t = search(&Graph::cycle(8), &RegressionModel::constant(0.3), &cfg).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.status, SearchStatus::ConvergedLocal);
    }

    #[test]
    fn maximize_degree_only_adds_edges() {
        let cfg = SearchConfig {
            mode: Mode::Maximize,
            epsilon: 1e-3,
            max_steps: 12,
            seed: 5,
            ..SearchConfig::default()
        };
        let t = search(&Graph::cycle(8), &degree_model(), &cfg).unwrap();
        assert_eq!(t.status, SearchStatus::Completed);
        assert!(t.steps.iter().all(|s| s.op.kind == OpKind::AddEdge));
        let graphs = t.graphs().unwrap();
        for w in graphs.windows(2) {
            assert_eq!(w[1].edge_count(), w[0].edge_count() + 1);
        }
        assert_eq!(graphs.last().unwrap(), &t.final_graph);
        for (g, s) in graphs[1..].iter().zip(&t.steps) {
            let v = featurize::<f64>(g, 0).unwrap();
            assert_eq!(v[Feature::AverageDegree], s.predicted);
        }
    }

    #[test]
    fn minimize_obeys_rule_and_is_deterministic() {
        let model = RegressionModel::from_raw(
            vec![Feature::AveragePathLength, Feature::ClusteringCoefficient],
            vec![1.0, 0.5],
            0.2,
        )
        .unwrap();
        let cfg = SearchConfig {
            max_steps: 6,
            seed: 9,
            ..SearchConfig::default()
        };
        let g0 = Graph::cycle(12);
        let a = search(&g0, &model, &cfg).unwrap();
        let b = search(&g0, &model, &cfg).unwrap();
        assert!(a.same_path(&b));
        let path: Vec<f64> = a.predicted_path();
        for w in path.windows(2) {
            assert!(w[0] - w[1] >= 0.01 * w[0].abs() && w[1] < w[0]);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let g = Graph::cycle(5);
        for cfg in [
            SearchConfig {
                epsilon: 0.0,
                ..SearchConfig::default()
            },
            SearchConfig {
                epsilon: 1.0,
                ..SearchConfig::default()
            },
            SearchConfig {
                max_steps: 0,
                ..SearchConfig::default()
            },
            SearchConfig {
                operators: vec![],
                ..SearchConfig::default()
            },
        ] {
            assert!(search(&g, &degree_model(), &cfg).is_err());
        }
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(search(&split, &degree_model(), &SearchConfig::default()).is_err());
    }
}
