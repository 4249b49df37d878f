//! Synthetic classification data and a small SGD trainer.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{MaskedMlpSpec, Params};
use crate::error::{Error, Result};
use crate::metrics::table::format_real;
use crate::rng;
use crate::scalar::Scalar;

/// Labelled points stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub x: Vec<T>,
    pub labels: Vec<usize>,
    pub dim: usize,
    pub classes: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Dataset {
            x: rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
            classes: self.classes,
        }
    }

    /// Random `(train, held_out)` split with `held_out_fraction` of the rows
    /// held out.
    pub fn split(&self, held_out_fraction: f64, seed: u64) -> (Self, Self) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng::stream(seed, rng::stream_id("holdout")));
        let held = ((self.len() as f64) * held_out_fraction).round() as usize;
        let (a, b) = order.split_at(held);
        (self.subset(b), self.subset(a))
    }

    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            x: self.x.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
            labels: self.labels.clone(),
            dim: self.dim,
            classes: self.classes,
        }
    }
}

/// Isotropic unit-variance Gaussian clusters. Class `c` is centred at
/// `separation` times a random unit vector.
pub fn gaussian_blobs(per_class: usize, dim: usize, classes: usize, separation: f64, seed: u64) -> Dataset<f64> {
    let mut r = rng::stream(seed, rng::stream_id("blobs"));
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| unit.sample(&mut r)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.iter().map(|x| separation * x / norm).collect()
        })
        .collect();
    let mut x = Vec::with_capacity(per_class * classes * dim);
    let mut labels = Vec::with_capacity(per_class * classes);
    for i in 0..per_class * classes {
        let c = i % classes;
        x.extend(centers[c].iter().map(|m| m + unit.sample(&mut r)));
        labels.push(c);
    }
    Dataset {
        x,
        labels,
        dim,
        classes,
    }
}

/// Gaussian blobs centred on the corners of the `{-1, 1}^dim` cube, each
/// labelled by the parity of its positive coordinates. Two classes; not
/// linearly separable for `dim ≥ 2`.
pub fn parity_blobs(per_corner: usize, dim: usize, noise: f64, seed: u64) -> Dataset<f64> {
    let mut r = rng::stream(seed, rng::stream_id("parity"));
    let jitter = Normal::new(0.0, noise.max(0.0)).expect("valid normal");
    let corners = 1usize << dim;
    let mut x = Vec::with_capacity(per_corner * corners * dim);
    let mut labels = Vec::with_capacity(per_corner * corners);
    for i in 0..per_corner * corners {
        let c = i % corners;
        for k in 0..dim {
            let centre = if c >> k & 1 == 1 { 1.0 } else { -1.0 };
            x.push(centre + jitter.sample(&mut r));
        }
        labels.push(c.count_ones() as usize % 2);
    }
    Dataset {
        x,
        labels,
        dim,
        classes: 2,
    }
}

/// Two-dimensional rings: class `c` lies at radius `c + 1` with Gaussian
/// radial noise.
pub fn concentric_rings(per_class: usize, classes: usize, noise: f64, seed: u64) -> Dataset<f64> {
    let mut r = rng::stream(seed, rng::stream_id("rings"));
    let jitter = Normal::new(0.0, noise.max(0.0)).expect("valid normal");
    let mut x = Vec::with_capacity(per_class * classes * 2);
    let mut labels = Vec::with_capacity(per_class * classes);
    for i in 0..per_class * classes {
        let c = i % classes;
        let theta = r.random::<f64>() * std::f64::consts::TAU;
        let rad = (c + 1) as f64 + jitter.sample(&mut r);
        x.push(rad * theta.cos());
        x.push(rad * theta.sin());
        labels.push(c);
    }
    Dataset {
        x,
        labels,
        dim: 2,
        classes,
    }
}

/// Test error of the nearest-class-mean rule fitted on `train`.
pub fn nearest_centroid_error(train: &Dataset<f64>, test: &Dataset<f64>) -> f64 {
    let mut sums = vec![vec![0.0; train.dim]; train.classes];
    let mut counts = vec![0usize; train.classes];
    for i in 0..train.len() {
        let c = train.labels[i];
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(train.row(i)) {
            *s += v;
        }
    }
    let centers: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s.iter().map(|v| v / n.max(1) as f64).collect())
        .collect();
    let wrong = (0..test.len())
        .filter(|&i| {
            let x = test.row(i);
            let best = (0..test.classes)
                .min_by(|&a, &b| {
                    let da: f64 = centers[a].iter().zip(x).map(|(m, v)| (m - v) * (m - v)).sum();
                    let db: f64 = centers[b].iter().zip(x).map(|(m, v)| (m - v) * (m - v)).sum();
                    da.total_cmp(&db)
                })
                .unwrap_or(0);
            best != test.labels[i]
        })
        .count();
    wrong as f64 / test.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 128,
            learning_rate: 0.1,
            momentum: 0.9,
            weight_decay: 5e-4,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_top1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome<T> {
    pub params: Params<T>,
    /// Held-out top-1 error after the last epoch.
    pub top1_error: f64,
    pub history: Vec<EpochRecord>,
}

/// Fraction of rows of `data` misclassified by `params`.
pub fn top1_error<T: Scalar>(spec: &MaskedMlpSpec, params: &Params<T>, data: &Dataset<T>) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let pred = params.predict(spec, &data.x)?;
    let wrong = pred.iter().zip(&data.labels).filter(|(p, y)| p != y).count();
    Ok(wrong as f64 / data.len() as f64)
}

/// Mini-batch SGD with Nesterov momentum, weight decay and a per-epoch
/// cosine learning rate, on mean softmax cross-entropy.
///
/// Parameters start from [`Params::init`] with the config seed; batches are
/// reshuffled every epoch from the same seed, so runs are reproducible.
pub fn train_toy<T: Scalar>(
    spec: &MaskedMlpSpec,
    train: &Dataset<T>,
    val: &Dataset<T>,
    config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    if train.classes < 2 || train.classes != spec.output_dim() {
        return Err(Error::param(
            "classes",
            format!(
                "{} classes for a network with {} outputs",
                train.classes,
                spec.output_dim()
            ),
        ));
    }
    if train.dim != spec.input_dim() || val.dim != spec.input_dim() {
        return Err(Error::Shape(format!(
            "data of dimension {} for a network with {} inputs",
            train.dim,
            spec.input_dim()
        )));
    }
    if train.is_empty() {
        return Err(Error::EmptySplit("train"));
    }
    if config.batch_size == 0 {
        return Err(Error::param("batch_size", "must be positive"));
    }
    let mut params = Params::init(spec, config.seed);
    let mut velocity = Params::<T>::zeros(spec);
    let mut r = rng::stream(config.seed, rng::stream_id("batches"));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mu = T::lit(config.momentum);
    let wd = T::lit(config.weight_decay);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let lr =
            0.5 * config.learning_rate * (1.0 + (std::f64::consts::PI * epoch as f64 / config.epochs as f64).cos());
        let step = T::lit(lr);
        order.shuffle(&mut r);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = train.subset(chunk);
            let (loss, grads) = params.loss_and_grad(spec, &batch.x, &batch.labels)?;
            let loss = loss.to_f64_lossy();
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            let layers = params.weights.iter_mut().zip(&grads.weights).zip(&mut velocity.weights);
            let biases = params.biases.iter_mut().zip(&grads.biases).zip(&mut velocity.biases);
            for ((p, g), v) in layers.chain(biases) {
                for ((p, &g), v) in p.iter_mut().zip(g).zip(v.iter_mut()) {
                    // masked weights have p = g = v = 0 and stay there
                    let g = g + wd * *p;
                    *v = mu * *v + g;
                    *p -= step * (g + mu * *v);
                }
            }
        }
        let train_loss = loss_sum / train.len() as f64;
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(EpochRecord {
            epoch: epoch + 1,
            lr,
            train_loss,
            val_top1: top1_error(spec, &params, val)?,
        });
    }
    let top1 = top1_error(spec, &params, val)?;
    Ok(TrainOutcome {
        params,
        top1_error: top1,
        history,
    })
}

pub fn write_epoch_csv<W: Write>(history: &[EpochRecord], mut w: W) -> Result<()> {
    writeln!(w, "epoch,lr,train_loss,val_top1")?;
    for e in history {
        writeln!(
            w,
            "{},{},{},{}",
            e.epoch,
            format_real(e.lr),
            format_real(e.train_loss),
            format_real(e.val_top1)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn separable_blobs_are_learned() {
        let data = gaussian_blobs(200, 4, 2, 6.0, 1);
        let (train, val) = data.split(0.25, 1);
        assert!(nearest_centroid_error(&train, &val) <= 0.02);
        let spec = MaskedMlpSpec::with_width(&Graph::complete(4), 16, 4, 4, 2).unwrap();
        let cfg = TrainConfig {
            epochs: 20,
            batch_size: 32,
            ..TrainConfig::default()
        };
        let out = train_toy(&spec, &train, &val, &cfg).unwrap();
        assert!(out.top1_error <= 0.05, "error {}", out.top1_error);
        assert_eq!(out.history.len(), 20);
        assert!(out.params.respects_mask(&spec));
    }

    #[test]
    fn zero_learning_rate_keeps_init() {
        let data = concentric_rings(40, 2, 0.1, 2);
        let (train, val) = data.split(0.25, 2);
        let spec = MaskedMlpSpec::with_width(&Graph::cycle(4), 8, 4, 2, 2).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            learning_rate: 0.0,
            seed: 7,
            ..TrainConfig::default()
        };
        let out = train_toy(&spec, &train, &val, &cfg).unwrap();
        let init = Params::init(&spec, 7);
        assert_eq!(out.params, init);
        assert_eq!(out.top1_error, top1_error(&spec, &init, &val).unwrap());
    }

    #[test]
    fn same_seed_same_params() {
        let data = concentric_rings(50, 3, 0.1, 3);
        let (train, val) = data.split(0.2, 3);
        let spec = MaskedMlpSpec::with_width(&Graph::cycle(5), 10, 5, 2, 3).unwrap();
        let cfg = TrainConfig {
            epochs: 4,
            batch_size: 16,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train_toy(&spec, &train, &val, &cfg).unwrap();
        let b = train_toy(&spec, &train, &val, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.params.respects_mask(&spec));
    }

    #[test]
    fn divergence_is_reported() {
        let data = gaussian_blobs(20, 2, 2, 1e150, 4);
        let spec = MaskedMlpSpec::with_width(&Graph::complete(2), 4, 3, 2, 2).unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            learning_rate: 10.0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_toy(&spec, &data, &data, &cfg),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn parity_defeats_the_centroid_rule() {
        let data = parity_blobs(20, 3, 0.2, 6);
        assert_eq!(data.len(), 160);
        assert_eq!(data.labels.iter().filter(|&&l| l == 1).count(), 80);
        let (train, val) = data.split(0.25, 6);
        assert!(nearest_centroid_error(&train, &val) > 0.3);
    }

    #[test]
    fn single_class_is_rejected() {
        let data = gaussian_blobs(10, 2, 1, 1.0, 5);
        let spec = MaskedMlpSpec::with_width(&Graph::complete(2), 4, 3, 2, 1).unwrap();
        assert!(train_toy(&spec, &data, &data, &TrainConfig::default()).is_err());
    }
}
