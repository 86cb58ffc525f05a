//! Mini-batch training and the seeded train/test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ann::{NetShape, SurrogateNet};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::scene::NormBounds;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Optimizer {
    pub fn sgd() -> Self {
        Optimizer::SgdMomentum { momentum: 0.9 }
    }

    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::SgdMomentum { .. } => "sgd-momentum",
            Optimizer::Adam { .. } => "adam",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub train_fraction: f64,
    pub hidden_neurons: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 10,
            learning_rate: 0.01,
            optimizer: Optimizer::sgd(),
            seed: 42,
            train_fraction: 0.8,
            hidden_neurons: 40,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        if self.hidden_neurons == 0 {
            return Err(Error::InvalidArgument("hidden layer needs at least one neuron".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Seeded shuffle of `0..n`, first `floor(n * fraction)` indices go to
/// training.
pub fn split(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cannot split {n} samples")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction {fraction} outside (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (n as f64 * fraction).floor() as usize;
    let test = idx.split_off(cut);
    Ok((idx, test))
}

struct OptimizerState {
    kind: Optimizer,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl OptimizerState {
    fn new(kind: Optimizer, lr: f64, params: usize) -> Self {
        OptimizerState {
            kind,
            lr,
            m: vec![0.0; params],
            v: vec![0.0; params],
            step: 0,
        }
    }

    fn apply(&mut self, net: &mut SurrogateNet, grad: &[f64]) {
        self.step += 1;
        match self.kind {
            Optimizer::SgdMomentum { momentum } => {
                for ((p, g), vel) in net.params_mut().zip(grad).zip(&mut self.m) {
                    *vel = momentum * *vel - self.lr * g;
                    *p += *vel;
                }
            }
            Optimizer::Adam { beta1, beta2, epsilon } => {
                let c1 = 1.0 - beta1.powi(self.step);
                let c2 = 1.0 - beta2.powi(self.step);
                for (((p, g), m), v) in net.params_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + epsilon);
                }
            }
        }
    }
}

/// Trains a fresh network. Returns it with the mean training loss of each
/// epoch.
pub fn train(
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    shape: NetShape,
    norm: NormBounds,
    cfg: &TrainConfig,
) -> Result<(SurrogateNet, Vec<f64>)> {
    cfg.validate()?;
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("inputs and targets differ in length".into()));
    }
    let shape = NetShape {
        hidden: cfg.hidden_neurons,
        ..shape
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = SurrogateNet::init(shape, norm, &mut rng, cfg.seed);
    let mut opt = OptimizerState::new(cfg.optimizer, cfg.learning_rate, net.param_count());
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut bx = Vec::with_capacity(cfg.batch_size);
    let mut by = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            bx.clear();
            by.clear();
            bx.extend(batch.iter().map(|&i| xs[i].clone()));
            by.extend(batch.iter().map(|&i| ys[i].clone()));
            let (grad, loss) = net.backward(&bx, &by)?;
            epoch_loss += loss * batch.len() as f64;
            opt.apply(&mut net, &grad.flat());
        }
        history.push(epoch_loss / xs.len() as f64);
    }
    Ok((net, history))
}

/// Encodes a labeled dataset with `norm` and trains on all of its rows.
pub fn train_dataset(
    data: &LabeledDataset,
    norm: NormBounds,
    cfg: &TrainConfig,
) -> Result<(SurrogateNet, Vec<f64>)> {
    let (xs, ys) = encode_dataset(data, &norm);
    train(&xs, &ys, NetShape::default(), norm, cfg)
}

pub fn encode_dataset(data: &LabeledDataset, norm: &NormBounds) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    data.rows
        .iter()
        .map(|r| {
            (
                norm.features(&r.config).as_slice().to_vec(),
                r.metrics.to_array().to_vec(),
            )
        })
        .unzip()
}
