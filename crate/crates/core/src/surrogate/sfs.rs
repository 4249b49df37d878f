//! Sequential forward selection.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_rows, Dataset, Design, RegressionModel, Split};
use crate::error::{Error, Result};
use crate::metrics::table::format_real;
use crate::metrics::{Feature, FEATURE_COUNT};
use crate::scalar::Scalar;
use crate::stats;

/// What a candidate is scored on when deciding which feature to add next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SelectionCriterion {
    /// MSE of the refit model on the TEST rows.
    #[default]
    TestMse,
    /// Mean held-out MSE over `folds` interleaved folds of the TRAIN rows.
    CrossValidation { folds: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SfsStep<T> {
    pub feature: Feature,
    pub score: T,
    pub test_mse: T,
    pub test_pearson: T,
    pub train_mse: T,
    pub model: RegressionModel<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SfsTrace<T> {
    pub steps: Vec<SfsStep<T>>,
    /// Candidates never added because they are constant on TRAIN.
    pub skipped: Vec<Feature>,
}

impl<T: Scalar> SfsTrace<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn features(&self) -> Vec<Feature> {
        self.steps.iter().map(|s| s.feature).collect()
    }

    pub fn records(&self) -> Vec<SfsRecord> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| SfsRecord {
                step: i + 1,
                feature: s.feature,
                test_mse: s.test_mse.to_f64_lossy(),
                test_pearson: s.test_pearson.to_f64_lossy(),
                train_mse: s.train_mse.to_f64_lossy(),
            })
            .collect()
    }
}

/// One CSV line of a persisted trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SfsRecord {
    pub step: usize,
    pub feature: Feature,
    pub test_mse: f64,
    pub test_pearson: f64,
    pub train_mse: f64,
}

/// Plain SFS over `candidates` scored on TEST MSE.
pub fn sfs<T: Scalar>(data: &Dataset<T>, candidates: &[Feature]) -> Result<SfsTrace<T>> {
    sfs_with(data, candidates, None, SelectionCriterion::TestMse)
}

/// SFS whose first step is forced to `first`.
pub fn sfs_fixed_first<T: Scalar>(data: &Dataset<T>, first: Feature, candidates: &[Feature]) -> Result<SfsTrace<T>> {
    sfs_with(data, candidates, Some(first), SelectionCriterion::TestMse)
}

/// Greedy forward selection until every non-constant candidate is in, or
/// until the TRAIN rows cannot support another regressor.
///
/// Each step refits with every remaining candidate added and keeps the one
/// with the lowest score; ties go to the earlier feature in canonical order.
pub fn sfs_with<T: Scalar>(
    data: &Dataset<T>,
    candidates: &[Feature],
    first: Option<Feature>,
    criterion: SelectionCriterion,
) -> Result<SfsTrace<T>> {
    let mut cands = candidates.to_vec();
    cands.sort();
    cands.dedup();
    if cands.is_empty() {
        return Err(Error::param("candidates", "no candidate features"));
    }
    if let Some(f) = first {
        if !cands.contains(&f) {
            return Err(Error::UnknownFeature(f.to_string()));
        }
    }
    let train = data.indices(Split::Train);
    let test = data.indices(Split::Test);
    if test.is_empty() {
        return Err(Error::EmptySplit("test"));
    }
    let design = Design::new(data, &train, &cands)?;
    let folds = match criterion {
        SelectionCriterion::TestMse => Vec::new(),
        SelectionCriterion::CrossValidation { folds } => {
            if folds < 2 || folds > train.len() {
                return Err(Error::param(
                    "folds",
                    format!("need 2..={} folds, got {folds}", train.len()),
                ));
            }
            (0..folds)
                .map(|f| {
                    let in_fold = |i: &usize| i % folds == f;
                    let fit: Vec<usize> = train
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !in_fold(i))
                        .map(|(_, &r)| r)
                        .collect();
                    let held: Vec<usize> = train
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| in_fold(i))
                        .map(|(_, &r)| r)
                        .collect();
                    Design::new(data, &fit, &cands).map(|d| (d, held))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let skipped: Vec<Feature> = (0..cands.len())
        .filter(|&i| design.is_constant(i))
        .map(|i| cands[i])
        .collect();
    if let Some(f) = first.filter(|f| skipped.contains(f)) {
        return Err(Error::ConstantFeature(f.to_string()));
    }
    let mut remaining: Vec<usize> = (0..cands.len()).filter(|&i| !design.is_constant(i)).collect();
    let score = |pick: &[usize]| -> Result<T> {
        match criterion {
            SelectionCriterion::TestMse => Ok(evaluate_rows(&design.fit(pick)?, data, &test).mse),
            SelectionCriterion::CrossValidation { .. } => {
                let mut total = T::zero();
                for (d, held) in &folds {
                    total += evaluate_rows(&d.fit(pick)?, data, held).mse;
                }
                Ok(total / T::from_count(folds.len()))
            }
        }
    };

    // fewest rows any fit sees; a k-feature fit needs more than k + 1
    let capacity = folds
        .iter()
        .map(|(d, _)| d.rows)
        .chain([design.rows])
        .min()
        .expect("train design");
    if capacity <= 2 && !remaining.is_empty() {
        return Err(Error::Underdetermined {
            rows: capacity,
            features: 1,
        });
    }
    let mut selected: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    while !remaining.is_empty() && selected.len() + 2 < capacity {
        let forced = first
            .filter(|_| selected.is_empty())
            .map(|f| cands.iter().position(|&c| c == f).expect("checked above"));
        let pool: Vec<usize> = match forced {
            Some(i) => vec![i],
            None => remaining.clone(),
        };
        let scored: Vec<Result<T>> = pool
            .par_iter()
            .map(|&c| {
                let mut pick = selected.clone();
                pick.push(c);
                score(&pick)
            })
            .collect();
        let mut best: Option<(T, usize)> = None;
        for (&c, s) in pool.iter().zip(scored) {
            let s = s?;
            if best.is_none_or(|(b, _)| s < b) {
                best = Some((s, c));
            }
        }
        let (best_score, chosen) = best.expect("pool non-empty");
        selected.push(chosen);
        remaining.retain(|&c| c != chosen);
        let mut model = design.fit(&selected)?;
        model.split_seed = data.split_seed();
        let train_eval = evaluate_rows(&model, data, &train);
        let test_eval = evaluate_rows(&model, data, &test);
        model.train = Some(train_eval);
        model.test = Some(test_eval);
        steps.push(SfsStep {
            feature: cands[chosen],
            score: if forced.is_some() {
                score(&selected)?
            } else {
                best_score
            },
            test_mse: test_eval.mse,
            test_pearson: test_eval.pearson,
            train_mse: train_eval.mse,
            model,
        });
    }
    Ok(SfsTrace { steps, skipped })
}

/// Pearson r between the feature sets chosen after the forced first feature.
///
/// For each trace the features of steps `2..=k` are encoded as a 0/1 vector
/// over the canonical features; entry `(a, b)` is the correlation of the
/// vectors of traces `a` and `b`.
pub fn feature_set_similarity<T: Scalar>(traces: &[SfsTrace<T>], k: usize) -> Result<Vec<Vec<T>>> {
    if k == 0 {
        return Err(Error::param("k", "subset size must be positive"));
    }
    let vectors = traces
        .iter()
        .map(|t| {
            if t.len() < k {
                return Err(Error::param(
                    "k",
                    format!("trace of length {} is shorter than {k}", t.len()),
                ));
            }
            let mut v = vec![T::zero(); FEATURE_COUNT];
            for s in &t.steps[1..k] {
                v[s.feature.index()] = T::one();
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    // a trace always picks some but not all features, so its vector is not
    // constant and correlates with itself exactly
    Ok(vectors
        .iter()
        .enumerate()
        .map(|(i, a)| {
            vectors
                .iter()
                .enumerate()
                .map(|(j, b)| if i == j { T::one() } else { stats::pearson(a, b) })
                .collect()
        })
        .collect())
}

pub fn write_sfs_csv<W: Write>(records: &[SfsRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.into());
    out.write_record(["step", "feature", "test_mse", "test_pearson", "train_mse"])
        .map_err(io)?;
    for r in records {
        out.write_record([
            r.step.to_string(),
            r.feature.to_string(),
            format_real(r.test_mse),
            format_real(r.test_pearson),
            format_real(r.train_mse),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sfs_csv<R: Read>(r: R) -> Result<Vec<SfsRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |reason: String| Error::Parse { line, reason };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() < 5 {
            return Err(bad(format!("expected 5 fields, got {}", rec.len())));
        }
        let real = |j: usize| rec[j].parse::<f64>().map_err(|e| bad(format!("field {j}: {e}")));
        out.push(SfsRecord {
            step: rec[0].parse().map_err(|e| bad(format!("step: {e}")))?,
            feature: rec[1].parse()?,
            test_mse: real(2)?,
            test_pearson: real(3)?,
            train_mse: real(4)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::synthetic;
    use super::*;

    fn monotone(trace: &SfsTrace<f64>) -> bool {
        trace
            .steps
            .windows(2)
            .all(|w| w[1].train_mse <= w[0].train_mse * (1.0 + 1e-9) + 1e-15)
    }

    #[test]
    fn single_candidate() {
        let d = synthetic(40, 1, |v| v[2]);
        let t = sfs(&d, &[Feature::Heterogeneity]).unwrap();
        assert_eq!(t.features(), vec![Feature::Heterogeneity]);
    }

    #[test]
    fn finds_the_two_true_features() {
        let (a, b) = (Feature::GiniIndex, Feature::Radius);
        let d = synthetic(300, 11, |v| 3.0 * v[a.index()] - 2.0 * v[b.index()] + 0.5);
        let t = sfs(&d, &Feature::ALL).unwrap();
        assert_eq!(t.len(), 26);
        let mut first_two = t.features()[..2].to_vec();
        first_two.sort();
        assert_eq!(first_two, vec![a, b]);
        assert!(t.steps[1].test_mse < 1e-20);
        assert!(monotone(&t));
    }

    #[test]
    fn fixed_first_matching_free_choice_is_identical() {
        let d = synthetic(120, 4, |v| v[7] + 0.3 * v[1] * v[1]);
        let free = sfs(&d, &Feature::ALL).unwrap();
        let fixed = sfs_fixed_first(&d, free.steps[0].feature, &Feature::ALL).unwrap();
        assert_eq!(free, fixed);
        let other = sfs_fixed_first(&d, Feature::CoreNumber, &Feature::ALL).unwrap();
        assert_eq!(other.steps[0].feature, Feature::CoreNumber);
        assert_eq!(other.len(), 26);
        assert!(monotone(&other));
    }

    #[test]
    fn stops_when_train_rows_run_out() {
        // 12 rows: 1 TEST, 11 TRAIN, so at most 9 regressors
        let d = synthetic(12, 4, |v| v[0] - v[3]);
        let t = sfs(&d, &Feature::ALL).unwrap();
        assert_eq!(t.len(), 9);
        assert!(matches!(
            sfs(&synthetic(3, 4, |v| v[0]), &Feature::ALL),
            Err(Error::Underdetermined { .. })
        ));
    }

    #[test]
    fn fixed_first_must_be_a_candidate() {
        let d = synthetic(40, 1, |v| v[2]);
        assert!(matches!(
            sfs_fixed_first(&d, Feature::Radius, &[Feature::Diameter]),
            Err(Error::UnknownFeature(_))
        ));
    }

    #[test]
    fn cross_validation_mode_runs() {
        let f = Feature::LocalEfficiency;
        let d = synthetic(100, 8, |v| v[f.index()]);
        let t = sfs_with(
            &d,
            &Feature::ALL[..6],
            None,
            SelectionCriterion::CrossValidation { folds: 5 },
        )
        .unwrap();
        assert_eq!(t.len(), 6);
        let t = sfs_with(
            &d,
            &[f, Feature::AverageDegree],
            None,
            SelectionCriterion::CrossValidation { folds: 5 },
        )
        .unwrap();
        assert_eq!(t.steps[0].feature, f);
    }

    #[test]
    fn similarity_matrix() {
        let d = synthetic(150, 5, |v| v[0] + v[1] + v[2]);
        let traces: Vec<_> = [Feature::Diameter, Feature::Radius, Feature::WedgeCount]
            .iter()
            .map(|&f| sfs_fixed_first(&d, f, &Feature::ALL).unwrap())
            .collect();
        let m = feature_set_similarity(&traces, 4).unwrap();
        for (i, row) in m.iter().enumerate() {
            assert!((row[i] - 1.0).abs() < 1e-12);
            for x in row {
                assert!((-1.0..=1.0).contains(x));
            }
        }
        assert!(feature_set_similarity(&traces, 27).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = synthetic(60, 2, |v| v[4]);
        let t = sfs(&d, &Feature::ALL[..5]).unwrap();
        let mut buf = Vec::new();
        write_sfs_csv(&t.records(), &mut buf).unwrap();
        assert_eq!(read_sfs_csv(buf.as_slice()).unwrap(), t.records());
    }
}
