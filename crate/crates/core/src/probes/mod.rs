//! Probe classifiers over frozen vectors.
//!
//! Two architectures:
//!
//! - linear: `softmax(W·x + b)`, dropout on the input vector;
//! - mlp: `softmax(W2·dropout(sigmoid(W1·x + b1)) + b2)`.
//!
//! Dropout is inverted (kept units are scaled by `1/(1-rate)` at train time)
//! so evaluation applies no scaling. All arithmetic is `f64`.

pub mod adam;
pub mod io;
pub mod matrix;
pub mod train;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use matrix::Matrix;
pub use train::{predict, train, EpochStats, TrainConfig};

pub const DEFAULT_HIDDEN_DIM: usize = 256;
pub const DEFAULT_DROPOUT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Mlp,
    Linear,
}

impl ProbeKind {
    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::Mlp => "mlp",
            ProbeKind::Linear => "linear",
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mlp" => Ok(ProbeKind::Mlp),
            "linear" | "lin" => Ok(ProbeKind::Linear),
            other => Err(format!("unknown probe kind `{other}`")),
        }
    }
}

/// Where dropout is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropoutSite {
    Input,
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    pub input_dim: usize,
    pub num_classes: usize,
    pub hidden_dim: usize,
    pub dropout_rate: f64,
    pub dropout_site: DropoutSite,
}

impl ProbeSpec {
    /// Spec with the default hidden size, dropout rate and dropout site
    /// (hidden layer for the MLP, input for the linear probe).
    pub fn new(kind: ProbeKind, input_dim: usize, num_classes: usize) -> Self {
        ProbeSpec {
            kind,
            input_dim,
            num_classes,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            dropout_rate: DEFAULT_DROPOUT,
            dropout_site: match kind {
                ProbeKind::Mlp => DropoutSite::Hidden,
                ProbeKind::Linear => DropoutSite::Input,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.num_classes == 0 {
            return Err(Error::Contract("probe dimensions must be positive".into()));
        }
        if self.kind == ProbeKind::Mlp && self.hidden_dim == 0 {
            return Err(Error::Contract("hidden_dim must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Contract(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if self.kind == ProbeKind::Linear && self.dropout_site == DropoutSite::Hidden {
            return Err(Error::Contract("linear probe has no hidden layer for dropout".into()));
        }
        Ok(())
    }

    /// (out, in) shapes of each layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        match self.kind {
            ProbeKind::Linear => vec![(self.num_classes, self.input_dim)],
            ProbeKind::Mlp => vec![
                (self.hidden_dim, self.input_dim),
                (self.num_classes, self.hidden_dim),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Layer weights; gradients and Adam moments use the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeParams {
    pub layers: Vec<Dense>,
}

impl ProbeParams {
    pub fn zeros(spec: &ProbeSpec) -> Self {
        ProbeParams {
            layers: spec
                .layer_shapes()
                .into_iter()
                .map(|(o, i)| Dense {
                    weight: Matrix::zeros(o, i),
                    bias: vec![0.0; o],
                })
                .collect(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    /// Every scalar parameter, layer by layer: weights then biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.as_slice().iter().chain(l.bias.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weight.as_mut_slice().iter_mut().chain(l.bias.iter_mut()))
    }

    fn check_shape(&self, spec: &ProbeSpec) -> Result<()> {
        let shapes: Vec<_> = self
            .layers
            .iter()
            .map(|l| (l.weight.rows(), l.weight.cols()))
            .collect();
        if shapes != spec.layer_shapes()
            || self.layers.iter().any(|l| l.bias.len() != l.weight.rows())
        {
            return Err(Error::Contract(format!(
                "parameter shapes {shapes:?} do not match spec {:?}",
                spec.layer_shapes()
            )));
        }
        Ok(())
    }
}

/// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
pub fn init_params<R: Rng>(spec: &ProbeSpec, rng: &mut R) -> ProbeParams {
    let mut params = ProbeParams::zeros(spec);
    for layer in &mut params.layers {
        let bound = 1.0 / (layer.weight.cols() as f64).sqrt();
        for w in layer.weight.as_mut_slice() {
            *w = rng.gen_range(-bound..=bound);
        }
    }
    params
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    /// Input after (optional) dropout.
    input: Matrix,
    /// Sigmoid activations before dropout (mlp only).
    hidden: Option<Matrix>,
    /// Scaled dropout mask on the hidden layer (mlp, train mode only).
    hidden_mask: Option<Matrix>,
    /// Hidden activations after dropout (mlp only).
    hidden_used: Option<Matrix>,
    pub logits: Matrix,
}

fn dropout_mask<R: Rng>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Matrix {
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let mut m = Matrix::zeros(rows, cols);
    for x in m.as_mut_slice() {
        *x = if rng.gen::<f64>() < keep { scale } else { 0.0 };
    }
    m
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

/// Class probabilities for a batch (one row per sample).
pub fn forward<R: Rng>(
    spec: &ProbeSpec,
    params: &ProbeParams,
    batch: &Matrix,
    mode: Mode,
    rng: &mut R,
) -> Result<(Matrix, Cache)> {
    params.check_shape(spec)?;
    if batch.cols() != spec.input_dim {
        return Err(Error::Contract(format!(
            "batch has {} columns, probe expects {}",
            batch.cols(),
            spec.input_dim
        )));
    }
    let train = mode == Mode::Train && spec.dropout_rate > 0.0;

    let mut input = batch.clone();
    if train && spec.dropout_site == DropoutSite::Input {
        input.hadamard_inplace(&dropout_mask(batch.rows(), batch.cols(), spec.dropout_rate, rng));
    }

    let cache = match spec.kind {
        ProbeKind::Linear => {
            let l = &params.layers[0];
            let logits = input.mul_transposed_plus(&l.weight, &l.bias);
            Cache {
                input,
                hidden: None,
                hidden_mask: None,
                hidden_used: None,
                logits,
            }
        }
        ProbeKind::Mlp => {
            let (l1, l2) = (&params.layers[0], &params.layers[1]);
            let mut hidden = input.mul_transposed_plus(&l1.weight, &l1.bias);
            hidden.map_inplace(sigmoid);
            let (hidden_mask, hidden_used) = if train && spec.dropout_site == DropoutSite::Hidden {
                let mask = dropout_mask(hidden.rows(), hidden.cols(), spec.dropout_rate, rng);
                let mut used = hidden.clone();
                used.hadamard_inplace(&mask);
                (Some(mask), used)
            } else {
                (None, hidden.clone())
            };
            let logits = hidden_used.mul_transposed_plus(&l2.weight, &l2.bias);
            Cache {
                input,
                hidden: Some(hidden),
                hidden_mask,
                hidden_used: Some(hidden_used),
                logits,
            }
        }
    };
    Ok((softmax(&cache.logits), cache))
}

fn check_labels(spec: &ProbeSpec, batch: &Matrix, labels: &[usize]) -> Result<()> {
    if labels.len() != batch.rows() {
        return Err(Error::Contract(format!(
            "{} labels for {} rows",
            labels.len(),
            batch.rows()
        )));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= spec.num_classes) {
        return Err(Error::Contract(format!(
            "label {l} outside [0, {})",
            spec.num_classes
        )));
    }
    if labels.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    Ok(())
}

/// Mean cross-entropy of the true labels, computed through log-softmax.
pub fn cross_entropy(logits: &Matrix, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|x| (x - max).exp()).sum::<f64>().ln() + max;
        total += log_sum - row[y];
    }
    total / labels.len() as f64
}

/// Loss and parameter gradients for one batch; train mode reuses the forward
/// pass's dropout masks in the backward pass.
pub fn loss_and_grads<R: Rng>(
    spec: &ProbeSpec,
    params: &ProbeParams,
    batch: &Matrix,
    labels: &[usize],
    mode: Mode,
    rng: &mut R,
) -> Result<(f64, ProbeParams, Matrix)> {
    check_labels(spec, batch, labels)?;
    let (probs, cache) = forward(spec, params, batch, mode, rng)?;
    let loss = cross_entropy(&cache.logits, labels);

    let n = labels.len() as f64;
    let mut d_logits = probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        let row = d_logits.row_mut(i);
        row[y] -= 1.0;
        for x in row.iter_mut() {
            *x /= n;
        }
    }

    let mut grads = ProbeParams::zeros(spec);
    match spec.kind {
        ProbeKind::Linear => {
            grads.layers[0].weight = d_logits.transposed_mul(&cache.input);
            grads.layers[0].bias = d_logits.column_sums();
        }
        ProbeKind::Mlp => {
            let hidden = cache.hidden.as_ref().expect("mlp cache");
            let hidden_used = cache.hidden_used.as_ref().expect("mlp cache");
            grads.layers[1].weight = d_logits.transposed_mul(hidden_used);
            grads.layers[1].bias = d_logits.column_sums();

            let mut d_hidden = d_logits.mul(&params.layers[1].weight);
            if let Some(mask) = &cache.hidden_mask {
                d_hidden.hadamard_inplace(mask);
            }
            for (d, h) in d_hidden.as_mut_slice().iter_mut().zip(hidden.as_slice()) {
                *d *= h * (1.0 - h);
            }
            grads.layers[0].weight = d_hidden.transposed_mul(&cache.input);
            grads.layers[0].bias = d_hidden.column_sums();
        }
    }
    Ok((loss, grads, probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn init_is_bounded_deterministic_with_zero_bias() {
        let spec = ProbeSpec::new(ProbeKind::Linear, 4, 3);
        let a = init_params(&spec, &mut rng());
        let b = init_params(&spec, &mut rng());
        assert_eq!(a, b);
        let w = &a.layers[0].weight;
        assert_eq!((w.rows(), w.cols()), (3, 4));
        assert!(w.as_slice().iter().all(|x| (-0.5..=0.5).contains(x)));
        assert!(a.layers[0].bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let spec = ProbeSpec::new(ProbeKind::Linear, 2, 3);
        let params = ProbeParams::zeros(&spec);
        let x = Matrix::from_rows(&[[0.3, -1.0]]);
        let (p, _) = forward(&spec, &params, &x, Mode::Eval, &mut rng()).unwrap();
        for &v in p.row(0) {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eval_mode_is_repeatable() {
        let spec = ProbeSpec::new(ProbeKind::Mlp, 3, 2);
        let params = init_params(&spec, &mut rng());
        let x = Matrix::from_rows(&[[0.3, -1.0, 2.0], [1.0, 1.0, 1.0]]);
        let (a, _) = forward(&spec, &params, &x, Mode::Eval, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let (b, _) = forward(&spec, &params, &x, Mode::Eval, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_two_class_loss_is_ln2() {
        let spec = ProbeSpec::new(ProbeKind::Linear, 1, 2);
        let params = ProbeParams::zeros(&spec);
        let x = Matrix::from_rows(&[[1.0]]);
        let (loss, _, _) = loss_and_grads(&spec, &params, &x, &[0], Mode::Eval, &mut rng()).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn confident_correct_prediction_has_zero_loss() {
        let logits = Matrix::from_rows(&[[0.0, -1e6]]);
        assert_eq!(cross_entropy(&logits, &[0]), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let spec = ProbeSpec::new(ProbeKind::Linear, 3, 2);
        let params = ProbeParams::zeros(&spec);
        let x = Matrix::from_rows(&[[1.0, 2.0]]);
        assert!(matches!(
            forward(&spec, &params, &x, Mode::Eval, &mut rng()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn inverted_dropout_preserves_expectation() {
        let mut r = rng();
        let trials = 20_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            sum += dropout_mask(1, 1, 0.2, &mut r).as_slice()[0];
        }
        let mean = sum / trials as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn spec_validation() {
        let mut spec = ProbeSpec::new(ProbeKind::Linear, 3, 2);
        assert!(spec.validate().is_ok());
        spec.dropout_rate = 1.0;
        assert!(spec.validate().is_err());
        spec.dropout_rate = 0.2;
        spec.dropout_site = DropoutSite::Hidden;
        assert!(spec.validate().is_err());
    }
}
