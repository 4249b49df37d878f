//! Trace persistence, validation against measured scores, multi-seed
//! summaries and plot tables.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{search, OpKind, RewireOp, SearchConfig, SearchStatus, SearchStep, SearchTrace};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::table::format_real;
use crate::rng;
use crate::scalar::Scalar;
use crate::stats;
use crate::surrogate::RegressionModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operands {
    pub removed: Vec<(usize, usize)>,
    pub added: Vec<(usize, usize)>,
}

/// One JSONL line of a persisted trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub op_kind: OpKind,
    pub operands: Operands,
    pub predicted: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    pub rejected_count: usize,
    pub cumulative_feature_time_ms: f64,
}

impl StepRecord {
    pub fn from_step<T: Scalar>(s: &SearchStep<T>) -> Self {
        StepRecord {
            step: s.step,
            op_kind: s.op.kind,
            operands: Operands {
                removed: s.op.removed.clone(),
                added: s.op.added.clone(),
            },
            predicted: s.predicted.to_f64_lossy(),
            measured: s.measured.map(Scalar::to_f64_lossy),
            rejected_count: s.rejected_count,
            cumulative_feature_time_ms: s.cumulative_feature_time_ms,
        }
    }

    pub fn to_step<T: Scalar>(&self) -> SearchStep<T> {
        SearchStep {
            step: self.step,
            op: RewireOp {
                kind: self.op_kind,
                removed: self.operands.removed.clone(),
                added: self.operands.added.clone(),
            },
            predicted: T::lit(self.predicted),
            measured: self.measured.map(T::lit),
            rejected_count: self.rejected_count,
            cumulative_feature_time_ms: self.cumulative_feature_time_ms,
        }
    }
}

pub fn write_jsonl<T: Scalar, W: Write>(steps: &[SearchStep<T>], mut w: W) -> Result<()> {
    for s in steps {
        serde_json::to_writer(&mut w, &StepRecord::from_step(s))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<T: Scalar, R: BufRead>(r: R) -> Result<Vec<SearchStep<T>>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StepRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec.to_step());
    }
    Ok(out)
}

/// Attaches `measure(graph, step)` to the initial graph (step 0) and to the
/// graph after every accepted step.
///
/// A failing call leaves that score empty and is reported alongside the
/// trace; the remaining steps are still measured.
pub fn validate_trace<T, F>(trace: &SearchTrace<T>, mut measure: F) -> Result<Validated<T>>
where
    T: Scalar,
    F: FnMut(&Graph, usize) -> Result<T>,
{
    let graphs = trace.graphs()?;
    let mut out = trace.clone();
    let mut failures = Vec::new();
    let mut run = |g: &Graph, step: usize| match measure(g, step) {
        Ok(x) => Some(x),
        Err(e) => {
            failures.push((step, e));
            None
        }
    };
    out.initial_measured = run(&graphs[0], 0);
    for (s, g) in out.steps.iter_mut().zip(&graphs[1..]) {
        s.measured = run(g, s.step);
    }
    Ok((out, failures))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quartiles<T> {
    pub q1: T,
    pub median: T,
    pub q3: T,
}

impl<T: Scalar> Quartiles<T> {
    pub fn of(xs: &[T]) -> Option<Self> {
        Some(Quartiles {
            q1: stats::quantile(xs, 0.25)?,
            median: stats::quantile(xs, 0.5)?,
            q3: stats::quantile(xs, 0.75)?,
        })
    }
}

/// Scores of the accepted steps `first_step..=last_step` across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary<T> {
    pub bucket: usize,
    pub first_step: usize,
    pub last_step: usize,
    /// Runs with at least one accepted step in the range.
    pub runs: usize,
    pub predicted: Quartiles<T>,
    pub measured: Option<Quartiles<T>>,
}

#[derive(Clone, Debug)]
pub struct MultiSeedSummary<T> {
    pub seeds: Vec<u64>,
    pub traces: Vec<SearchTrace<T>>,
    pub buckets: Vec<BucketSummary<T>>,
}

impl<T> MultiSeedSummary<T> {
    pub fn statuses(&self) -> Vec<SearchStatus> {
        self.traces.iter().map(|t| t.status).collect()
    }
}

/// Scores one graph, e.g. by training the network it describes.
pub type MeasureFn<'a, T> = dyn Fn(&Graph) -> Result<T> + Sync + 'a;

/// A re-measured trace and the steps whose measurement failed.
pub type Validated<T> = (SearchTrace<T>, Vec<(usize, Error)>);

/// Seed of run `i` of a multi-seed experiment.
pub fn run_seed(base: u64, i: usize) -> u64 {
    rng::named_seed(base, &format!("run-{i}"))
}

pub fn multi_seed_statistics<T: Scalar>(
    g0: &Graph,
    model: &RegressionModel<T>,
    config: &SearchConfig,
    n_seeds: usize,
    bucket: usize,
) -> Result<MultiSeedSummary<T>> {
    multi_seed_statistics_with(g0, model, config, n_seeds, bucket, None)
}

/// Runs `n_seeds` searches in parallel and summarises them per step range.
///
/// Within each run the scores of the steps falling in a bucket are
/// averaged; the bucket then reports quartiles of those run means. With a
/// `measure` callback every trace is validated first and measured scores
/// are summarised the same way.
pub fn multi_seed_statistics_with<T: Scalar>(
    g0: &Graph,
    model: &RegressionModel<T>,
    config: &SearchConfig,
    n_seeds: usize,
    bucket: usize,
    measure: Option<&MeasureFn<'_, T>>,
) -> Result<MultiSeedSummary<T>> {
    if n_seeds == 0 {
        return Err(Error::param("n_seeds", "must be at least 1"));
    }
    if bucket == 0 {
        return Err(Error::param("bucket", "must be at least 1"));
    }
    let seeds: Vec<u64> = (0..n_seeds).map(|i| run_seed(config.seed, i)).collect();
    let traces = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SearchConfig { seed, ..config.clone() };
            let t = search(g0, model, &cfg)?;
            match measure {
                Some(m) => validate_trace(&t, |g, _| m(g)).map(|(t, _)| t),
                None => Ok(t),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let buckets = summarize(&traces, bucket);
    Ok(MultiSeedSummary { seeds, traces, buckets })
}

fn summarize<T: Scalar>(traces: &[SearchTrace<T>], width: usize) -> Vec<BucketSummary<T>> {
    let longest = traces.iter().map(|t| t.steps.len()).max().unwrap_or(0);
    let count = longest.div_ceil(width);
    (0..count)
        .map(|b| {
            let first = b * width + 1;
            let last = (b + 1) * width;
            let mut predicted = Vec::new();
            let mut measured = Vec::new();
            for t in traces {
                let inside: Vec<&SearchStep<T>> =
                    t.steps.iter().filter(|s| s.step >= first && s.step <= last).collect();
                if inside.is_empty() {
                    continue;
                }
                let p: Vec<T> = inside.iter().map(|s| s.predicted).collect();
                predicted.push(stats::mean(&p));
                let m: Vec<T> = inside.iter().filter_map(|s| s.measured).collect();
                if !m.is_empty() {
                    measured.push(stats::mean(&m));
                }
            }
            BucketSummary {
                bucket: b,
                first_step: first,
                last_step: last,
                runs: predicted.len(),
                predicted: Quartiles::of(&predicted).expect("bucket has a run"),
                measured: Quartiles::of(&measured),
            }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

/// `step,predicted,measured` starting at step 0 (the initial graph).
pub fn write_path_csv<T: Scalar, W: Write>(trace: &SearchTrace<T>, mut w: W) -> Result<()> {
    writeln!(w, "step,predicted,measured")?;
    writeln!(
        w,
        "0,{},{}",
        format_real(trace.initial_predicted.to_f64_lossy()),
        opt(trace.initial_measured.map(Scalar::to_f64_lossy))
    )?;
    for s in &trace.steps {
        writeln!(
            w,
            "{},{},{}",
            s.step,
            format_real(s.predicted.to_f64_lossy()),
            opt(s.measured.map(Scalar::to_f64_lossy))
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `step,cumulative_feature_time_ms,rejected_count`.
pub fn write_cost_csv<T: Scalar, W: Write>(trace: &SearchTrace<T>, mut w: W) -> Result<()> {
    writeln!(w, "step,cumulative_feature_time_ms,rejected_count")?;
    for s in &trace.steps {
        writeln!(
            w,
            "{},{},{}",
            s.step,
            format_real(s.cumulative_feature_time_ms),
            s.rejected_count
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bucket_csv<T: Scalar, W: Write>(buckets: &[BucketSummary<T>], mut w: W) -> Result<()> {
    writeln!(
        w,
        "bucket,first_step,last_step,runs,predicted_q1,predicted_median,predicted_q3,measured_q1,measured_median,measured_q3"
    )?;
    for b in buckets {
        let m = b.measured;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            b.bucket,
            b.first_step,
            b.last_step,
            b.runs,
            format_real(b.predicted.q1.to_f64_lossy()),
            format_real(b.predicted.median.to_f64_lossy()),
            format_real(b.predicted.q3.to_f64_lossy()),
            opt(m.map(|q| q.q1.to_f64_lossy())),
            opt(m.map(|q| q.median.to_f64_lossy())),
            opt(m.map(|q| q.q3.to_f64_lossy())),
        )?;
    }
    w.flush()?;
    Ok(())
}
