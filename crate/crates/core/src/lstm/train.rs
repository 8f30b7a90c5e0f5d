use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EpochLoss, Error, Result};
use crate::rng::{purpose, StreamKey};

use super::backprop::{chunk_gradients, mse};
use super::network::{network_forward, LstmNetwork};

/// Loss above which training is aborted.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Training sequence length N.
    pub seq_len: usize,
    /// Number of truncated-BPTT chunks per sequence.
    pub resolution_factor: usize,
    pub learning_rate: f64,
    /// Per-epoch multiplicative learning-rate decay; 1 keeps it constant.
    pub lr_decay: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
    pub shuffle: bool,
    pub hidden_size: usize,
    pub layers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            seq_len: 18_000,
            resolution_factor: 9,
            learning_rate: 1e-3,
            lr_decay: 1.0,
            batch_size: 1,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 5.0,
            shuffle: true,
            hidden_size: 150,
            layers: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("seq_len", self.seq_len),
            ("resolution_factor", self.resolution_factor),
            ("batch_size", self.batch_size),
            ("hidden_size", self.hidden_size),
            ("layers", self.layers),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.seq_len % self.resolution_factor != 0 {
            return Err(Error::Config(format!(
                "seq_len {} is not divisible by resolution_factor {}",
                self.seq_len, self.resolution_factor
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be finite and >= 0".into()));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::Config("lr_decay must lie in (0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.epsilon > 0.0) || !(self.clip_norm > 0.0) {
            return Err(Error::Config("epsilon and clip_norm must be positive".into()));
        }
        Ok(())
    }

    pub fn chunk_len(&self) -> usize {
        self.seq_len / self.resolution_factor
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        vec![self.hidden_size; self.layers]
    }
}

/// One standardized input/target pair, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Sequence {
    pub fn len(&self, input_width: usize) -> usize {
        self.input.len() / input_width
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub train: Vec<Sequence>,
    pub validation: Vec<Sequence>,
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: LstmNetwork,
    v: LstmNetwork,
}

impl Adam {
    pub fn new(net: &LstmNetwork, cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            step: 0,
            m: net.zeros_like(),
            v: net.zeros_like(),
        }
    }

    pub fn step(&mut self, net: &mut LstmNetwork, grads: &LstmNetwork) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        for (((p, g), m), v) in net
            .params_mut()
            .into_iter()
            .zip(grads.params())
            .zip(self.m.params_mut())
            .zip(self.v.params_mut())
        {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
    }
}

/// Scales `grads` so its global norm is at most `max_norm`.
pub fn clip_global_norm(grads: &mut LstmNetwork, max_norm: f64) -> f64 {
    let n = grads.norm();
    if n > max_norm {
        grads.scale(max_norm / n);
    }
    n
}

/// Mean sequence MSE over a set, evaluated from zero state.
pub fn evaluate(net: &LstmNetwork, seqs: &[Sequence]) -> Result<f64> {
    if seqs.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let losses: Vec<f64> = seqs
        .par_iter()
        .map(|s| network_forward(net, &s.input).and_then(|y| mse(&y, &s.target)))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Validation loss of the untrained network.
    pub initial_validation: f64,
    pub history: Vec<EpochLoss>,
}

impl TrainReport {
    pub fn final_validation(&self) -> f64 {
        self.history
            .last()
            .map(|e| e.validation)
            .unwrap_or(self.initial_validation)
    }
}

/// Trains `net` in place with Adam over truncated-BPTT chunks.
///
/// Each batch walks its sequences chunk by chunk, carrying the LSTM state
/// across chunk boundaries and taking one optimizer step per chunk. The
/// per-epoch training loss is the full-sequence MSE after the epoch.
pub fn train(net: &mut LstmNetwork, data: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    net.validate()?;
    if data.train.is_empty() || data.validation.is_empty() {
        return Err(Error::InvalidArgument(
            "training needs non-empty train and validation sets".into(),
        ));
    }
    let ni = net.input_width();
    let no = net.output_width();
    for s in data.train.iter().chain(&data.validation) {
        let len = s.len(ni);
        if len == 0 || s.input.len() != len * ni || s.target.len() != len * no {
            return Err(Error::Dimension("sequence shape does not match network".into()));
        }
    }
    let chunk = cfg.chunk_len();
    let initial_validation = evaluate(net, &data.validation)?;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut adam = Adam::new(net, cfg);
    let mut order: Vec<usize> = (0..data.train.len()).collect();

    for epoch in 1..=cfg.epochs {
        adam.lr = cfg.learning_rate * cfg.lr_decay.powi(epoch as i32 - 1);
        if cfg.shuffle {
            let mut rng = StreamKey::new(cfg.seed, purpose::TRAIN, epoch as u64).rng();
            order.sort_unstable();
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(cfg.batch_size) {
            let mut states: Vec<_> = batch.iter().map(|_| net.zero_states()).collect();
            let longest = batch.iter().map(|&i| data.train[i].len(ni)).max().unwrap_or(0);
            let mut start = 0;
            while start < longest {
                let snapshot = &*net;
                let parts: Vec<(f64, LstmNetwork)> = batch
                    .par_iter()
                    .zip(states.par_iter_mut())
                    .filter_map(|(&i, st)| {
                        let s = &data.train[i];
                        let len = s.len(ni);
                        if start >= len {
                            return None;
                        }
                        let end = (start + chunk).min(len);
                        let mut g = snapshot.zeros_like();
                        Some(
                            chunk_gradients(
                                snapshot,
                                &s.input[start * ni..end * ni],
                                &s.target[start * no..end * no],
                                st,
                                &mut g,
                                1.0,
                            )
                            .map(|l| (l, g)),
                        )
                    })
                    .collect::<Result<_>>()?;
                let mut grads = net.zeros_like();
                let mut loss = 0.0;
                for (l, g) in &parts {
                    grads.add_assign(g);
                    loss += l;
                }
                let n = parts.len() as f64;
                if !(loss / n).is_finite() || loss / n > DIVERGENCE_LOSS {
                    return Err(Error::Diverged {
                        epoch,
                        loss: loss / n,
                        history,
                    });
                }
                grads.scale(1.0 / n);
                clip_global_norm(&mut grads, cfg.clip_norm);
                adam.step(net, &grads);
                start += chunk;
            }
        }
        let train_loss = evaluate(net, &data.train)?;
        let validation = evaluate(net, &data.validation)?;
        log::debug!("epoch {epoch}: train {train_loss:.6e}, validation {validation:.6e}");
        let worst = train_loss.max(validation);
        if !worst.is_finite() || worst > DIVERGENCE_LOSS {
            return Err(Error::Diverged {
                epoch,
                loss: worst,
                history,
            });
        }
        history.push(EpochLoss {
            epoch,
            train: train_loss,
            validation,
        });
    }
    Ok(TrainReport {
        initial_validation,
        history,
    })
}

/// Trailing moving average with window `w` (shorter at the start).
pub fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    (0..x.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            x[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}
