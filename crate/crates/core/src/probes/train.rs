//! Minibatch training loop and prediction.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{
    adam_step, forward, init_params, loss_and_grads, AdamConfig, AdamState, Matrix, Mode,
    ProbeParams, ProbeSpec,
};
use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::seed;
use crate::tasks::{ProbeTaskDataset, Sample, TaskKind};

pub const DEFAULT_EPOCHS: usize = 30;
pub const DEFAULT_BATCH_SIZE: usize = 64;
pub const DEFAULT_SEED: u64 = 1974;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            batch_size: DEFAULT_BATCH_SIZE,
            seed: DEFAULT_SEED,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Defaults with the task's learning rate.
    pub fn for_task(task: TaskKind) -> Self {
        TrainConfig {
            learning_rate: task.default_learning_rate(),
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Contract("epochs and batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Contract(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
}

fn to_matrix(samples: &[Sample], dim: usize) -> Matrix {
    let mut data = Vec::with_capacity(samples.len() * dim);
    for s in samples {
        data.extend_from_slice(&s.vector);
    }
    Matrix::from_vec(samples.len(), dim, data)
}

/// Train on the dataset's train split and return the final-epoch parameters
/// together with per-epoch statistics.
///
/// Initialization, dropout masks and each epoch's shuffle draw from separate
/// streams derived from `config.seed`, so a run is a pure function of
/// `(spec, dataset, config)`.
pub fn train(
    spec: &ProbeSpec,
    dataset: &ProbeTaskDataset,
    config: &TrainConfig,
) -> Result<(ProbeParams, Vec<EpochStats>)> {
    spec.validate()?;
    config.validate()?;
    if spec.input_dim != dataset.dim || spec.num_classes != dataset.num_classes {
        return Err(Error::Contract(format!(
            "probe ({} -> {}) does not fit dataset ({} -> {})",
            spec.input_dim, spec.num_classes, dataset.dim, dataset.num_classes
        )));
    }
    let samples = dataset.split(Split::Train);
    if samples.is_empty() {
        return Err(Error::Contract("train split is empty".into()));
    }
    let x = to_matrix(samples, dataset.dim);
    let y: Vec<usize> = samples.iter().map(|s| s.label).collect();

    let mut params = init_params(spec, &mut seed::rng_for(config.seed, "init"));
    let mut dropout_rng = seed::rng_for(config.seed, "dropout");
    let mut state = AdamState::new(spec);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut shuffle_rng = seed::rng_for(seed::derive_index(config.seed, epoch as u64), "shuffle");
        order.sort_unstable();
        order.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch = x.select_rows(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, grads, _) =
                loss_and_grads(spec, &params, &batch, &labels, Mode::Train, &mut dropout_rng)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    loss,
                });
            }
            loss_sum += loss * chunk.len() as f64;
            adam_step(&mut params, &grads, &mut state, config.learning_rate, &config.adam)?;
        }
        if params.values().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                epoch,
                batch: order.len().div_ceil(config.batch_size) - 1,
                loss: f64::NAN,
            });
        }

        let predictions = predict_matrix(spec, &params, &x)?;
        let correct = predictions.iter().zip(&y).filter(|(p, t)| p == t).count();
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / samples.len() as f64,
            train_acc: correct as f64 / samples.len() as f64,
        });
    }
    Ok((params, history))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = i;
        }
    }
    best
}

fn predict_matrix(spec: &ProbeSpec, params: &ProbeParams, x: &Matrix) -> Result<Vec<usize>> {
    // Eval mode never touches the rng.
    let mut unused = seed::rng_for(0, "eval");
    let (probs, _) = forward(spec, params, x, Mode::Eval, &mut unused)?;
    Ok((0..probs.rows()).map(|i| argmax(probs.row(i))).collect())
}

/// Argmax class per vector (ties go to the lowest index), without dropout.
pub fn predict<V: AsRef<[f64]>>(
    spec: &ProbeSpec,
    params: &ProbeParams,
    vectors: &[V],
) -> Result<Vec<usize>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(v) = vectors.iter().find(|v| v.as_ref().len() != spec.input_dim) {
        return Err(Error::Contract(format!(
            "vector of dimension {}, probe expects {}",
            v.as_ref().len(),
            spec.input_dim
        )));
    }
    predict_matrix(spec, params, &Matrix::from_rows(vectors))
}
