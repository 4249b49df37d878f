//! Toy-scale measurement of a relational graph: build its masked MLP, train
//! it a few times and report the mean held-out top-1 error.

use graphnas_core::mlp::{
    concentric_rings, count_flops, gaussian_blobs, match_flop_budget, parity_blobs, train_toy, Dataset, EpochRecord,
    FlopBudget, MaskedMlpSpec, Params, TrainConfig,
};
use graphnas_core::rng::named_seed;
use graphnas_core::{Graph, Result};

use crate::manifest::{ToyConfig, ToyData};

pub struct Measurement {
    pub top1_error: f64,
    pub per_init: Vec<f64>,
    /// Epoch history of the first initialisation.
    pub history: Vec<EpochRecord>,
    pub spec: MaskedMlpSpec,
    pub params: Params<f64>,
}

pub struct ToyBench {
    config: ToyConfig,
    seed: u64,
    train: Dataset<f64>,
    held_out: Dataset<f64>,
}

impl ToyBench {
    pub fn new(config: &ToyConfig, seed: u64) -> Self {
        let data_seed = named_seed(seed, "data");
        let data = match config.data {
            ToyData::Parity => parity_blobs(config.per_class, config.dim, config.spread, data_seed),
            ToyData::Blobs => gaussian_blobs(config.per_class, config.dim, config.classes, config.spread, data_seed),
            ToyData::Rings => concentric_rings(config.per_class, config.classes, config.spread, data_seed),
        };
        let (train, held_out) = data.split(config.held_out, named_seed(seed, "holdout"));
        ToyBench {
            config: config.clone(),
            seed,
            train,
            held_out,
        }
    }

    pub fn train_len(&self) -> usize {
        self.train.len()
    }

    pub fn held_out_len(&self) -> usize {
        self.held_out.len()
    }

    fn spec(&self, g: &Graph) -> Result<MaskedMlpSpec> {
        let c = &self.config;
        let n = g.node_count();
        let (dim, classes) = (self.train.dim, self.train.classes);
        if c.match_flops {
            let full = MaskedMlpSpec::with_width(&Graph::complete(n), n * c.units_per_node, c.n_layers, dim, classes)?;
            let budget: FlopBudget = count_flops(&full);
            match_flop_budget(g, budget, c.n_layers, dim, classes)
        } else {
            MaskedMlpSpec::with_width(g, n * c.units_per_node, c.n_layers, dim, classes)
        }
    }

    pub fn measure(&self, g: &Graph) -> Result<Measurement> {
        let c = &self.config;
        let spec = self.spec(g)?;
        let mut per_init = Vec::with_capacity(c.inits);
        let mut first = None;
        for k in 0..c.inits {
            let cfg = TrainConfig {
                epochs: c.epochs,
                batch_size: c.batch_size,
                learning_rate: c.learning_rate,
                momentum: c.momentum,
                weight_decay: c.weight_decay,
                seed: named_seed(self.seed, &format!("init-{k}")),
            };
            let out = train_toy(&spec, &self.train, &self.held_out, &cfg)?;
            per_init.push(out.top1_error);
            if first.is_none() {
                first = Some((out.history, out.params));
            }
        }
        let (history, params) = first.expect("at least one initialisation");
        Ok(Measurement {
            top1_error: per_init.iter().sum::<f64>() / per_init.len() as f64,
            per_init,
            history,
            spec,
            params,
        })
    }
}
