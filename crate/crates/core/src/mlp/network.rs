//! Parameters, forward pass and exact gradients.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::MaskedMlpSpec;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Row-major `out × in` weight matrices and bias vectors, one per layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Params<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

/// Values cached by [`Params::forward`] for the backward pass.
#[derive(Clone, Debug)]
pub struct Activations<T> {
    pub batch: usize,
    /// Layer inputs; `inputs[0]` is the batch itself.
    pub inputs: Vec<Vec<T>>,
    /// Pre-activations of every layer; the last one holds the logits.
    pub pre: Vec<Vec<T>>,
}

impl<T: Scalar> Activations<T> {
    pub fn logits(&self) -> &[T] {
        self.pre.last().expect("at least one layer")
    }
}

impl<T: Scalar> Params<T> {
    pub fn zeros(spec: &MaskedMlpSpec) -> Self {
        let (weights, biases) = (0..spec.n_layers())
            .map(|l| {
                let (fan_in, fan_out) = spec.layer_dims(l);
                (vec![T::zero(); fan_in * fan_out], vec![T::zero(); fan_out])
            })
            .unzip();
        Params { weights, biases }
    }

    /// He-normal weights scaled by each unit's active fan-in, zero biases,
    /// masked entries zero.
    pub fn init(spec: &MaskedMlpSpec, seed: u64) -> Self {
        let mut p = Self::zeros(spec);
        let mut r = rng::stream(seed, rng::stream_id("init"));
        let unit = Normal::new(0.0, 1.0).expect("valid normal");
        for l in 0..spec.n_layers() {
            let (fan_in, fan_out) = spec.layer_dims(l);
            let mask = spec.layer_mask(l);
            for o in 0..fan_out {
                let row = o * fan_in..(o + 1) * fan_in;
                let active = mask.map_or(fan_in, |m| m[row.clone()].iter().filter(|&&a| a).count());
                let scale = (2.0 / active.max(1) as f64).sqrt();
                for k in row {
                    let draw = unit.sample(&mut r);
                    if mask.is_none_or(|m| m[k]) {
                        p.weights[l][k] = T::lit(draw * scale);
                    }
                }
            }
        }
        p
    }

    pub fn check_shape(&self, spec: &MaskedMlpSpec) -> Result<()> {
        if self.weights.len() != spec.n_layers() || self.biases.len() != spec.n_layers() {
            return Err(Error::Shape(format!(
                "{} weight and {} bias layers for a {}-layer spec",
                self.weights.len(),
                self.biases.len(),
                spec.n_layers()
            )));
        }
        for l in 0..spec.n_layers() {
            let (fan_in, fan_out) = spec.layer_dims(l);
            if self.weights[l].len() != fan_in * fan_out || self.biases[l].len() != fan_out {
                return Err(Error::Shape(format!(
                    "layer {l}: expected {fan_out}×{fan_in} weights and {fan_out} biases, got {} and {}",
                    self.weights[l].len(),
                    self.biases[l].len()
                )));
            }
        }
        Ok(())
    }

    /// Whether every masked weight is exactly zero.
    pub fn respects_mask(&self, spec: &MaskedMlpSpec) -> bool {
        (0..spec.n_layers()).all(|l| {
            spec.layer_mask(l)
                .is_none_or(|m| m.iter().zip(&self.weights[l]).all(|(&a, &w)| a || w == T::zero()))
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    /// Forward pass of a row-major `batch × input_dim` input. ReLU between
    /// layers, identity on the output.
    pub fn forward(&self, spec: &MaskedMlpSpec, x: &[T]) -> Result<Activations<T>> {
        self.check_shape(spec)?;
        let d = spec.input_dim();
        if !x.len().is_multiple_of(d) {
            return Err(Error::Shape(format!(
                "input of length {} is not a multiple of {d}",
                x.len()
            )));
        }
        let batch = x.len() / d;
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(spec.n_layers());
        for l in 0..spec.n_layers() {
            let (fan_in, fan_out) = spec.layer_dims(l);
            let mask = spec.layer_mask(l);
            let w = &self.weights[l];
            let input = inputs.last().expect("non-empty");
            let mut z = vec![T::zero(); batch * fan_out];
            for b in 0..batch {
                let xb = &input[b * fan_in..(b + 1) * fan_in];
                for o in 0..fan_out {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    let mut s = self.biases[l][o];
                    match mask {
                        Some(m) => {
                            let mrow = &m[o * fan_in..(o + 1) * fan_in];
                            for k in 0..fan_in {
                                if mrow[k] {
                                    s += row[k] * xb[k];
                                }
                            }
                        }
                        None => {
                            for k in 0..fan_in {
                                s += row[k] * xb[k];
                            }
                        }
                    }
                    z[b * fan_out + o] = s;
                }
            }
            if l + 1 < spec.n_layers() {
                inputs.push(z.iter().map(|&v| v.max(T::zero())).collect());
            }
            pre.push(z);
        }
        Ok(Activations { batch, inputs, pre })
    }

    /// Gradients of the loss given `dlogits = ∂loss/∂logits`. Masked
    /// positions get exactly zero.
    pub fn backward(&self, spec: &MaskedMlpSpec, acts: &Activations<T>, dlogits: &[T]) -> Result<Params<T>> {
        let batch = acts.batch;
        if dlogits.len() != batch * spec.output_dim() {
            return Err(Error::Shape(format!(
                "logit gradient of length {} for batch {batch} × {} outputs",
                dlogits.len(),
                spec.output_dim()
            )));
        }
        let mut grads = Params::zeros(spec);
        let mut delta = dlogits.to_vec();
        for l in (0..spec.n_layers()).rev() {
            let (fan_in, fan_out) = spec.layer_dims(l);
            let mask = spec.layer_mask(l);
            let input = &acts.inputs[l];
            let gw = &mut grads.weights[l];
            let gb = &mut grads.biases[l];
            for b in 0..batch {
                let db = &delta[b * fan_out..(b + 1) * fan_out];
                let xb = &input[b * fan_in..(b + 1) * fan_in];
                for o in 0..fan_out {
                    let g = db[o];
                    gb[o] += g;
                    if g == T::zero() {
                        continue;
                    }
                    for k in 0..fan_in {
                        gw[o * fan_in + k] += g * xb[k];
                    }
                }
            }
            if let Some(m) = mask {
                for (gv, &a) in gw.iter_mut().zip(m) {
                    if !a {
                        *gv = T::zero();
                    }
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.weights[l];
            let below = &acts.pre[l - 1];
            let mut next = vec![T::zero(); batch * fan_in];
            for b in 0..batch {
                let db = &delta[b * fan_out..(b + 1) * fan_out];
                let nb = &mut next[b * fan_in..(b + 1) * fan_in];
                for o in 0..fan_out {
                    let g = db[o];
                    if g == T::zero() {
                        continue;
                    }
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    match mask {
                        Some(m) => {
                            let mrow = &m[o * fan_in..(o + 1) * fan_in];
                            for k in 0..fan_in {
                                if mrow[k] {
                                    nb[k] += g * row[k];
                                }
                            }
                        }
                        None => {
                            for k in 0..fan_in {
                                nb[k] += g * row[k];
                            }
                        }
                    }
                }
                for (v, &z) in nb.iter_mut().zip(&below[b * fan_in..(b + 1) * fan_in]) {
                    if z <= T::zero() {
                        *v = T::zero();
                    }
                }
            }
            delta = next;
        }
        Ok(grads)
    }

    /// Mean softmax cross-entropy over the batch and its gradient.
    pub fn loss_and_grad(&self, spec: &MaskedMlpSpec, x: &[T], labels: &[usize]) -> Result<(T, Params<T>)> {
        let acts = self.forward(spec, x)?;
        let (loss, dlogits) = cross_entropy(acts.logits(), labels, spec.output_dim())?;
        let grads = self.backward(spec, &acts, &dlogits)?;
        Ok((loss, grads))
    }

    /// Predicted class of every row.
    pub fn predict(&self, spec: &MaskedMlpSpec, x: &[T]) -> Result<Vec<usize>> {
        let acts = self.forward(spec, x)?;
        let c = spec.output_dim();
        Ok(acts
            .logits()
            .chunks(c)
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold(
                        (0, T::neg_infinity()),
                        |best, (i, &v)| if v > best.1 { (i, v) } else { best },
                    )
                    .0
            })
            .collect())
    }
}

/// Mean softmax cross-entropy of row-major logits and `∂loss/∂logits`.
pub fn cross_entropy<T: Scalar>(logits: &[T], labels: &[usize], classes: usize) -> Result<(T, Vec<T>)> {
    if logits.len() != labels.len() * classes {
        return Err(Error::Shape(format!(
            "{} logits for {} labels × {classes} classes",
            logits.len(),
            labels.len()
        )));
    }
    let batch = labels.len();
    let inv = T::one() / T::from_count(batch.max(1));
    let mut loss = T::zero();
    let mut grad = vec![T::zero(); logits.len()];
    for (b, &y) in labels.iter().enumerate() {
        if y >= classes {
            return Err(Error::Shape(format!("label {y} out of {classes} classes")));
        }
        let row = &logits[b * classes..(b + 1) * classes];
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let sum: T = row.iter().map(|&v| (v - max).exp()).sum();
        loss += (sum.ln() + max - row[y]) * inv;
        for c in 0..classes {
            let p = (row[c] - max).exp() / sum;
            let target = if c == y { T::one() } else { T::zero() };
            grad[b * classes + c] = (p - target) * inv;
        }
    }
    Ok((loss, grad))
}
