//! Linear performance predictor over graph features and sequential forward
//! selection of its inputs.

mod sfs;

pub use sfs::{
    feature_set_similarity, read_sfs_csv, sfs, sfs_fixed_first, sfs_with, write_sfs_csv, SelectionCriterion, SfsRecord,
    SfsStep, SfsTrace,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::table::FeatureTable;
use crate::metrics::{Feature, FeatureVector};
use crate::rng;
use crate::scalar::Scalar;
use crate::stats;

/// Ridge added to the feature correlation matrix when it is singular.
pub const RIDGE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub graph_id: usize,
    pub features: FeatureVector<T>,
    pub target: T,
}

/// Feature rows with targets, each tagged TRAIN or TEST.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    rows: Vec<Sample<T>>,
    split: Vec<Split>,
    split_seed: Option<u64>,
}

impl<T: Scalar> Dataset<T> {
    /// Random 9:1 split drawn from `split_seed`. The test side gets
    /// `round(n/10)` rows, at least one once there are two rows.
    pub fn new(rows: Vec<Sample<T>>, split_seed: u64) -> Self {
        let n = rows.len();
        let mut n_test = (n + 5) / 10;
        if n >= 2 {
            n_test = n_test.max(1);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(split_seed, rng::stream_id("split")));
        let mut split = vec![Split::Train; n];
        for &i in &order[..n_test] {
            split[i] = Split::Test;
        }
        Dataset {
            rows,
            split,
            split_seed: Some(split_seed),
        }
    }

    /// Explicit split assignment.
    pub fn with_split(rows: Vec<Sample<T>>, split: Vec<Split>) -> Result<Self> {
        if rows.len() != split.len() {
            return Err(Error::Shape(format!(
                "{} rows but {} split tags",
                rows.len(),
                split.len()
            )));
        }
        Ok(Dataset {
            rows,
            split,
            split_seed: None,
        })
    }

    /// Rows of a feature table; every row needs a target.
    pub fn from_table(table: &FeatureTable<T>, split_seed: u64) -> Result<Self> {
        let rows = table
            .rows
            .iter()
            .map(|r| {
                r.target
                    .map(|target| Sample {
                        graph_id: r.graph_id,
                        features: r.features,
                        target,
                    })
                    .ok_or_else(|| Error::param("top1_error", format!("graph {} has no target", r.graph_id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset::new(rows, split_seed))
    }

    pub fn rows(&self) -> &[Sample<T>] {
        &self.rows
    }

    pub fn split(&self) -> &[Split] {
        &self.split
    }

    pub fn split_seed(&self) -> Option<u64> {
        self.split_seed
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.split[i] == which).collect()
    }

    /// Copy with every target replaced by `f(sample)`.
    pub fn map_targets(&self, mut f: impl FnMut(&Sample<T>) -> T) -> Self {
        let mut out = self.clone();
        for s in &mut out.rows {
            s.target = f(s);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation<T> {
    pub mse: T,
    pub pearson: T,
}

/// Fitted linear surrogate over a feature subset.
///
/// Inputs are standardised with TRAIN means and standard deviations before
/// the coefficients apply; the intercept is the TRAIN target mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegressionModel<T> {
    pub features: Vec<Feature>,
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub means: Vec<T>,
    pub stds: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<Evaluation<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<Evaluation<T>>,
}

impl<T: Scalar> RegressionModel<T> {
    /// Model that ignores its input.
    pub fn constant(value: T) -> Self {
        RegressionModel {
            features: Vec::new(),
            coefficients: Vec::new(),
            intercept: value,
            means: Vec::new(),
            stds: Vec::new(),
            split_seed: None,
            train: None,
            test: None,
        }
    }

    /// Model `intercept + Σ slope·x` on raw feature values.
    pub fn from_raw(features: Vec<Feature>, slopes: Vec<T>, intercept: T) -> Result<Self> {
        if features.len() != slopes.len() {
            return Err(Error::Shape(format!(
                "{} features but {} slopes",
                features.len(),
                slopes.len()
            )));
        }
        let k = features.len();
        let model = RegressionModel {
            features,
            coefficients: slopes,
            intercept,
            means: vec![T::zero(); k],
            stds: vec![T::one(); k],
            split_seed: None,
            train: None,
            test: None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.features.len();
        if self.coefficients.len() != k || self.means.len() != k || self.stds.len() != k {
            return Err(Error::Shape(format!(
                "model with {k} features has {} coefficients, {} means, {} stds",
                self.coefficients.len(),
                self.means.len(),
                self.stds.len()
            )));
        }
        if let Some(i) = self.stds.iter().position(|s| s.is_nan() || *s <= T::zero()) {
            return Err(Error::ConstantFeature(self.features[i].to_string()));
        }
        Ok(())
    }

    pub fn predict(&self, x: &FeatureVector<T>) -> T {
        self.features
            .iter()
            .zip(&self.coefficients)
            .zip(self.means.iter().zip(&self.stds))
            .fold(self.intercept, |acc, ((&f, &c), (&mu, &sd))| acc + c * (x[f] - mu) / sd)
    }

    /// Prediction from values listed in `self.features` order.
    pub fn predict_values(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.features.len());
        values
            .iter()
            .zip(&self.coefficients)
            .zip(self.means.iter().zip(&self.stds))
            .fold(self.intercept, |acc, ((&x, &c), (&mu, &sd))| acc + c * (x - mu) / sd)
    }

    /// Slopes on unstandardised features.
    pub fn raw_coefficients(&self) -> Vec<T> {
        self.coefficients
            .iter()
            .zip(&self.stds)
            .map(|(&c, &sd)| c / sd)
            .collect()
    }

    /// Intercept on unstandardised features.
    pub fn raw_intercept(&self) -> T {
        self.coefficients
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .fold(self.intercept, |acc, (&c, (&mu, &sd))| acc - c * mu / sd)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

/// Standardised least-squares system over `features` on a set of rows.
///
/// Holds everything needed to fit any subset of `features` without touching
/// the rows again: means, standard deviations, the correlation matrix of the
/// standardised columns and their correlation with the centred target.
pub(crate) struct Design<T> {
    pub features: Vec<Feature>,
    pub means: Vec<T>,
    pub stds: Vec<T>,
    corr: Vec<T>,
    xy: Vec<T>,
    y_mean: T,
    rows: usize,
}

impl<T: Scalar> Design<T> {
    pub fn new(data: &Dataset<T>, rows: &[usize], features: &[Feature]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySplit("train"));
        }
        let k = features.len();
        let nt = T::from_count(n);
        let column = |f: Feature| -> Vec<T> { rows.iter().map(|&r| data.rows[r].features[f]).collect() };
        let cols: Vec<Vec<T>> = features.iter().map(|&f| column(f)).collect();
        let means: Vec<T> = cols.iter().map(|c| stats::mean(c)).collect();
        let stds: Vec<T> = cols
            .iter()
            .zip(&means)
            .map(|(c, &mu)| {
                let v: T = c.iter().map(|&x| (x - mu) * (x - mu)).sum::<T>() / nt;
                let sd = v.sqrt();
                // relative floor: a column equal to its mean up to rounding is constant
                if sd <= T::epsilon() * T::lit(16.0) * mu.abs() {
                    T::zero()
                } else {
                    sd
                }
            })
            .collect();
        let z: Vec<Vec<T>> = cols
            .iter()
            .zip(means.iter().zip(&stds))
            .map(|(c, (&mu, &sd))| {
                if sd > T::zero() {
                    c.iter().map(|&x| (x - mu) / sd).collect()
                } else {
                    vec![T::zero(); n]
                }
            })
            .collect();
        let y: Vec<T> = rows.iter().map(|&r| data.rows[r].target).collect();
        let y_mean = stats::mean(&y);
        let mut corr = vec![T::zero(); k * k];
        for a in 0..k {
            for b in a..k {
                let s: T = z[a].iter().zip(&z[b]).map(|(&p, &q)| p * q).sum::<T>() / nt;
                corr[a * k + b] = s;
                corr[b * k + a] = s;
            }
        }
        let xy = z
            .iter()
            .map(|col| col.iter().zip(&y).map(|(&p, &q)| p * (q - y_mean)).sum::<T>() / nt)
            .collect();
        Ok(Design {
            features: features.to_vec(),
            means,
            stds,
            corr,
            xy,
            y_mean,
            rows: n,
        })
    }

    pub fn is_constant(&self, i: usize) -> bool {
        let s = self.stds[i];
        s.is_nan() || s <= T::zero()
    }

    /// Fit on columns `pick` (indices into `self.features`).
    pub fn fit(&self, pick: &[usize]) -> Result<RegressionModel<T>> {
        if let Some(&i) = pick.iter().find(|&&i| self.is_constant(i)) {
            return Err(Error::ConstantFeature(self.features[i].to_string()));
        }
        if self.rows <= pick.len() + 1 {
            return Err(Error::Underdetermined {
                rows: self.rows,
                features: pick.len(),
            });
        }
        let k = pick.len();
        let kk = self.features.len();
        let mut a = vec![T::zero(); k * k];
        for (p, &i) in pick.iter().enumerate() {
            for (q, &j) in pick.iter().enumerate() {
                a[p * k + q] = self.corr[i * kk + j];
            }
        }
        let b: Vec<T> = pick.iter().map(|&i| self.xy[i]).collect();
        let coefficients = solve_spd_with_ridge(&mut a, k, &b);
        Ok(RegressionModel {
            features: pick.iter().map(|&i| self.features[i]).collect(),
            coefficients,
            intercept: self.y_mean,
            means: pick.iter().map(|&i| self.means[i]).collect(),
            stds: pick.iter().map(|&i| self.stds[i]).collect(),
            split_seed: None,
            train: None,
            test: None,
        })
    }
}

/// Solves `a x = b` for symmetric positive semi-definite `a`, adding a ridge
/// to the diagonal (growing tenfold) until the factorisation succeeds.
fn solve_spd_with_ridge<T: Scalar>(a: &mut [T], k: usize, b: &[T]) -> Vec<T> {
    if k == 0 {
        return Vec::new();
    }
    let tol = T::epsilon() * T::lit(1e3);
    if let Some(l) = linalg::cholesky(a, k, tol) {
        return linalg::cholesky_solve(&l, k, b);
    }
    let mut lambda = T::lit(RIDGE);
    let mut added = T::zero();
    loop {
        for i in 0..k {
            a[i * k + i] += lambda - added;
        }
        added = lambda;
        if let Some(l) = linalg::cholesky(a, k, tol) {
            return linalg::cholesky_solve(&l, k, b);
        }
        lambda *= T::lit(10.0);
    }
}

/// OLS fit of `subset` on the TRAIN rows.
pub fn fit_ols<T: Scalar>(data: &Dataset<T>, subset: &[Feature]) -> Result<RegressionModel<T>> {
    let train = data.indices(Split::Train);
    let design = Design::new(data, &train, subset)?;
    let pick: Vec<usize> = (0..subset.len()).collect();
    let mut model = design.fit(&pick)?;
    model.split_seed = data.split_seed;
    model.train = Some(evaluate_rows(&model, data, &train));
    let test = data.indices(Split::Test);
    if !test.is_empty() {
        model.test = Some(evaluate_rows(&model, data, &test));
    }
    Ok(model)
}

/// MSE and Pearson r of `model` on the TEST rows.
pub fn evaluate<T: Scalar>(model: &RegressionModel<T>, data: &Dataset<T>) -> Result<Evaluation<T>> {
    evaluate_split(model, data, Split::Test)
}

pub fn evaluate_split<T: Scalar>(model: &RegressionModel<T>, data: &Dataset<T>, which: Split) -> Result<Evaluation<T>> {
    let rows = data.indices(which);
    if rows.is_empty() {
        return Err(Error::EmptySplit(match which {
            Split::Train => "train",
            Split::Test => "test",
        }));
    }
    Ok(evaluate_rows(model, data, &rows))
}

pub(crate) fn evaluate_rows<T: Scalar>(model: &RegressionModel<T>, data: &Dataset<T>, rows: &[usize]) -> Evaluation<T> {
    let pred: Vec<T> = rows.iter().map(|&r| model.predict(&data.rows[r].features)).collect();
    let truth: Vec<T> = rows.iter().map(|&r| data.rows[r].target).collect();
    Evaluation {
        mse: stats::mse(&pred, &truth),
        pearson: stats::pearson(&pred, &truth),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::metrics::FEATURE_COUNT;
    use rand::Rng;

    /// Rows with independent uniform features and `target(features)`.
    pub fn synthetic(n: usize, seed: u64, target: impl Fn(&[f64; FEATURE_COUNT]) -> f64) -> Dataset<f64> {
        let mut rng = rng::stream(seed, 0);
        let rows = (0..n)
            .map(|i| {
                let mut v = [0.0; FEATURE_COUNT];
                for x in v.iter_mut() {
                    *x = rng.random::<f64>();
                }
                Sample {
                    graph_id: i,
                    target: target(&v),
                    features: FeatureVector::from_values(v),
                }
            })
            .collect();
        Dataset::new(rows, seed)
    }

    #[test]
    fn split_is_nine_to_one() {
        let d = synthetic(100, 3, |_| 0.0);
        assert_eq!(d.indices(Split::Test).len(), 10);
        assert_eq!(d.indices(Split::Train).len(), 90);
        let again = synthetic(100, 3, |_| 0.0);
        assert_eq!(d.split(), again.split());
    }

    #[test]
    fn constant_target() {
        let d = synthetic(50, 1, |_| 3.0);
        let m = fit_ols(&d, &[Feature::AverageDegree, Feature::Radius]).unwrap();
        assert_eq!(m.intercept, 3.0);
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn recovers_linear_target() {
        let i = Feature::AverageDegree.index();
        let d = synthetic(200, 7, |v| 2.0 * v[i] + 1.0);
        let m = fit_ols(&d, &[Feature::AverageDegree]).unwrap();
        assert!((m.raw_coefficients()[0] - 2.0).abs() < 1e-8);
        assert!((m.raw_intercept() - 1.0).abs() < 1e-8);
        let e = evaluate(&m, &d).unwrap();
        assert!(e.mse < 1e-12);
        assert!((e.pearson - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_pair_uses_ridge() {
        let i = Feature::AverageDegree.index();
        let j = Feature::Radius.index();
        let rows = synthetic(60, 2, |v| v[i]).rows().to_vec();
        let rows = rows
            .into_iter()
            .map(|mut s| {
                let mut v = *s.features.values();
                v[j] = v[i];
                s.features = FeatureVector::from_values(v);
                s
            })
            .collect();
        let d = Dataset::new(rows, 2);
        let m = fit_ols(&d, &[Feature::AverageDegree, Feature::Radius]).unwrap();
        assert!(m.coefficients.iter().all(|c| c.is_finite()));
        assert!(evaluate(&m, &d).unwrap().mse < 1e-12);
    }

    #[test]
    fn rejects_constant_feature_and_empty_train() {
        let d = synthetic(30, 4, |v| v[0]).map_targets(|s| s.target);
        let rows: Vec<_> = d
            .rows()
            .iter()
            .cloned()
            .map(|mut s| {
                let mut v = *s.features.values();
                v[Feature::Diameter.index()] = 2.0;
                s.features = FeatureVector::from_values(v);
                s
            })
            .collect();
        let d = Dataset::new(rows.clone(), 4);
        assert!(matches!(
            fit_ols(&d, &[Feature::Diameter]),
            Err(Error::ConstantFeature(_))
        ));
        let all_test = Dataset::with_split(rows, vec![Split::Test; 30]).unwrap();
        assert!(matches!(
            fit_ols(&all_test, &[Feature::Radius]),
            Err(Error::EmptySplit("train"))
        ));
    }

    #[test]
    fn evaluate_sign_of_correlation() {
        let d = synthetic(40, 5, |v| v[3]);
        let m = RegressionModel::from_raw(vec![Feature::AveragePathLength], vec![-1.0], 0.0).unwrap();
        assert!((evaluate(&m, &d).unwrap().pearson + 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let d = synthetic(80, 9, |v| v[0] - 0.5 * v[5]);
        let m = fit_ols(&d, &[Feature::AverageDegree, Feature::Resilience]).unwrap();
        let back = RegressionModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
